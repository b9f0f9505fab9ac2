use super::message::{Message, FRAME_OVERHEAD};

/// Traffic between the coordinator and one worker. Payload bytes count
/// 8 per real; frame headers are tallied separately in `overhead_bytes`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkerTraffic {
    pub downlink_messages: u64,
    pub downlink_payload_bytes: u64,
    pub uplink_messages: u64,
    /// Payload of gradient replies only.
    pub uplink_gradient_bytes: u64,
    /// Payload of every other reply (initial eigenpairs, Newton steps,
    /// Rayleigh quotients, means, ...).
    pub uplink_other_bytes: u64,
    pub overhead_bytes: u64,
}

impl WorkerTraffic {
    pub fn uplink_payload_bytes(&self) -> u64 {
        self.uplink_gradient_bytes + self.uplink_other_bytes
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommLedger {
    pub workers: Vec<WorkerTraffic>,
    /// Request/reply rounds issued by the coordinator.
    pub rounds: u64,
}

impl CommLedger {
    pub fn new(k: usize) -> Self {
        Self {
            workers: vec![WorkerTraffic::default(); k],
            rounds: 0,
        }
    }

    pub fn reset(&mut self) {
        let k = self.workers.len();
        *self = Self::new(k);
    }

    pub(crate) fn record_down(&mut self, worker: usize, msg: &Message) {
        let t = &mut self.workers[worker];
        t.downlink_messages += 1;
        t.downlink_payload_bytes += msg.payload_bytes() as u64;
        t.overhead_bytes += FRAME_OVERHEAD as u64;
    }

    pub(crate) fn record_up(&mut self, worker: usize, msg: &Message) {
        let t = &mut self.workers[worker];
        t.uplink_messages += 1;
        let bytes = msg.payload_bytes() as u64;
        if matches!(msg, Message::GradientReply { .. }) {
            t.uplink_gradient_bytes += bytes;
        } else {
            t.uplink_other_bytes += bytes;
        }
        t.overhead_bytes += FRAME_OVERHEAD as u64;
    }

    pub fn max_uplink_payload_bytes(&self) -> u64 {
        self.workers.iter().map(|w| w.uplink_payload_bytes()).max().unwrap_or(0)
    }

    pub fn total_payload_bytes(&self) -> u64 {
        self.workers
            .iter()
            .map(|w| w.downlink_payload_bytes + w.uplink_payload_bytes())
            .sum()
    }
}
