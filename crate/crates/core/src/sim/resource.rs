//! FIFO capacity tokens.

use std::collections::VecDeque;

/// Tokens for one node or directed edge. Requests queue in arrival order
/// and a waiting agent is granted only while fewer agents stand ahead of it
/// than there are free tokens.
///
/// Returned tokens only become free at the next [`Resource::settle`]. If a
/// token freed mid-second were usable at once, a late requester could take
/// it ahead of queue members that had already asked during that second.
#[derive(Clone, Debug)]
pub struct Resource {
    max_tokens: u32,
    held: u32,
    returned: u32,
    queue: VecDeque<u32>,
}

impl Resource {
    pub fn new(max_tokens: u32) -> Self {
        Resource {
            max_tokens,
            held: 0,
            returned: 0,
            queue: VecDeque::new(),
        }
    }

    pub fn max_tokens(&self) -> u32 {
        self.max_tokens
    }

    /// Tokens taken, including any returned since the last settle.
    pub fn held(&self) -> u32 {
        self.held
    }

    pub fn free(&self) -> u32 {
        self.max_tokens.saturating_sub(self.held)
    }

    pub fn waiting(&self) -> usize {
        self.queue.len()
    }

    /// Takes a token outside the queue; used for initial placement.
    pub fn seize(&mut self) {
        self.held += 1;
    }

    /// Queues `agent` if it is not already waiting, then grants a token if
    /// its queue position allows.
    pub fn request(&mut self, agent: u32) -> bool {
        let pos = match self.queue.iter().position(|&a| a == agent) {
            Some(p) => p,
            None => {
                self.queue.push_back(agent);
                self.queue.len() - 1
            }
        };
        if (pos as u32) < self.free() {
            self.queue.remove(pos);
            self.held += 1;
            true
        } else {
            false
        }
    }

    pub fn cancel(&mut self, agent: u32) {
        if let Some(p) = self.queue.iter().position(|&a| a == agent) {
            self.queue.remove(p);
        }
    }

    /// Returns a token; it is free again after the next settle.
    pub fn release(&mut self) {
        debug_assert!(self.held > self.returned, "release without a held token");
        self.returned += 1;
    }

    /// Frees every token returned since the previous call.
    pub fn settle(&mut self) {
        self.held = self.held.saturating_sub(self.returned);
        self.returned = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grants_follow_request_order() {
        let mut r = Resource::new(1);
        assert!(r.request(5));
        assert!(!r.request(9));
        assert!(!r.request(2));
        r.release();
        assert!(!r.request(9), "returned tokens wait for the settle");
        r.settle();
        // agent 2 asks first this second but 9 is ahead of it
        assert!(!r.request(2));
        assert!(r.request(9));
        r.release();
        r.settle();
        assert!(r.request(2));
        assert_eq!(r.waiting(), 0);
    }

    #[test]
    fn cancel_gives_up_the_place() {
        let mut r = Resource::new(0);
        r.request(1);
        r.request(2);
        r.cancel(1);
        r.max_tokens = 1;
        assert!(r.request(2));
    }
}
