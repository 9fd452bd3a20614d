use rand_distr::{Distribution, Geometric};

use super::schedule::{ScheduleClock, ScheduleConfig, SimTime};
use crate::qcore::{c, CMatrix, DensityMatrix, Node, QubitLabel, QubitRole, RngStream};
use crate::{Error, Result};

/// Heralded photonic link producing a noisy `|00> + |11>` pair on the two
/// network qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawLinkModel {
    /// Probability mass in the odd-parity sector.
    pub population_error: f64,
    /// Relative loss of `|00><11|` coherence.
    pub coherence_error: f64,
}

impl RawLinkModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("population_error", self.population_error), ("coherence_error", self.coherence_error)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.fidelity() <= 0.5 {
            return Err(Error::InvalidArgument(format!(
                "raw pair fidelity {} must exceed 0.5",
                self.fidelity()
            )));
        }
        Ok(())
    }

    pub fn fidelity(&self) -> f64 {
        let even = 1.0 - self.population_error;
        0.5 * (even + even * (1.0 - self.coherence_error))
    }

    pub fn state(&self) -> CMatrix {
        let even = 0.5 * (1.0 - self.population_error);
        let odd = 0.5 * self.population_error;
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(even, 0.0);
        m[(3, 3)] = c(even, 0.0);
        m[(1, 1)] = c(odd, 0.0);
        m[(2, 2)] = c(odd, 0.0);
        let coh = even * (1.0 - self.coherence_error);
        m[(0, 3)] = c(coh, 0.0);
        m[(3, 0)] = c(coh, 0.0);
        m
    }

    pub fn pair(&self) -> DensityMatrix {
        DensityMatrix::new(
            self.state(),
            vec![
                QubitLabel::site(Node::Alice, QubitRole::Network),
                QubitLabel::site(Node::Bob, QubitRole::Network),
            ],
        )
        .expect("validated link state")
    }
}

/// Number of attempts up to and including the first herald.
pub fn sample_attempts(success_prob: f64, rng: &mut RngStream) -> Result<u64> {
    let geo = Geometric::new(success_prob).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(geo.sample(rng) + 1)
}

/// Try until success on the given schedule.
pub fn generate_raw_pair(
    link: &RawLinkModel,
    schedule: &ScheduleConfig,
    rng: &mut RngStream,
    clock: &mut ScheduleClock,
) -> Result<(DensityMatrix, u64, SimTime)> {
    link.validate()?;
    let attempts = sample_attempts(schedule.success_prob, rng)?;
    let elapsed = clock.run_attempts(attempts);
    Ok((link.pair(), attempts, elapsed))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub sent: SimTime,
    pub delivered: SimTime,
    pub from: Node,
    pub to: Node,
    pub payload: u8,
}

/// Real-time classical channel between the two modules.
#[derive(Clone, Debug, Default)]
pub struct ClassicalLink {
    pub latency: SimTime,
    log: Vec<Message>,
}

impl ClassicalLink {
    pub fn new(latency: SimTime) -> Self {
        Self { latency, log: Vec::new() }
    }

    /// Queue a message; returns its delivery time.
    pub fn send(&mut self, from: Node, to: Node, at: SimTime, payload: u8) -> SimTime {
        let delivered = at + self.latency;
        if let Some(prev) = self.log.iter().rev().find(|m| m.from == from) {
            debug_assert!(prev.delivered <= delivered, "per-sender order violated");
        }
        self.log.push(Message {
            sent: at,
            delivered,
            from,
            to,
            payload,
        });
        delivered
    }

    pub fn log(&self) -> &[Message] {
        &self.log
    }

    pub fn clear(&mut self) {
        self.log.clear();
    }
}

/// Bernoulli helper used by the event engine.
