//! Attempt windows interleaved with cooling, on an integer picosecond clock.

use crate::{Error, Result};

/// Simulation time in picoseconds.
pub type SimTime = u64;

pub fn us_to_ps(us: f64) -> SimTime {
    (us * 1e6).round() as SimTime
}

pub fn ps_to_us(ps: SimTime) -> f64 {
    ps as f64 * 1e-6
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleConfig {
    pub attempt_window_us: f64,
    pub doppler_window_us: f64,
    pub eit_window_us: f64,
    /// Duration of one attempt, including optical pumping.
    pub attempt_period_us: f64,
    pub success_prob: f64,
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("attempt_window_us", self.attempt_window_us),
            ("doppler_window_us", self.doppler_window_us),
            ("eit_window_us", self.eit_window_us),
            ("attempt_period_us", self.attempt_period_us),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.success_prob > 0.0 && self.success_prob <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "success_prob must lie in (0, 1], got {}",
                self.success_prob
            )));
        }
        Ok(())
    }

    pub fn cooling_us(&self) -> f64 {
        self.doppler_window_us + self.eit_window_us
    }

    /// Fraction of wall-clock spent attempting.
    pub fn duty_cycle(&self) -> f64 {
        self.attempt_window_us / (self.attempt_window_us + self.cooling_us())
    }

    /// Heralds per second from the schedule alone.
    pub fn herald_rate_hz(&self) -> f64 {
        self.success_prob * self.duty_cycle() / (self.attempt_period_us * 1e-6)
    }

    /// Attempt period giving `rate_hz` heralds per second.
    pub fn period_for_rate(&self, rate_hz: f64) -> f64 {
        self.success_prob * self.duty_cycle() / rate_hz * 1e6
    }
}

/// Wall clock of the entanglement-generation loop. The position inside the
/// current attempt window persists across calls, so cooling is inserted exactly
/// once per exhausted window regardless of how attempts are batched.
#[derive(Clone, Debug)]
pub struct ScheduleClock {
    window: SimTime,
    cooling: SimTime,
    period: SimTime,
    now: SimTime,
    window_used: SimTime,
    attempt_time: SimTime,
}

impl ScheduleClock {
    pub fn new(cfg: &ScheduleConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            window: us_to_ps(cfg.attempt_window_us),
            cooling: us_to_ps(cfg.doppler_window_us) + us_to_ps(cfg.eit_window_us),
            period: us_to_ps(cfg.attempt_period_us),
            now: 0,
            window_used: 0,
            attempt_time: 0,
        })
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Total time spent inside attempt windows.
    pub fn attempt_time(&self) -> SimTime {
        self.attempt_time
    }

    /// Run `n` attempts back to back; returns the elapsed time.
    pub fn run_attempts(&mut self, n: u64) -> SimTime {
        let start = self.now;
        let mut remaining = n * self.period;
        while remaining > 0 {
            if self.window_used == self.window {
                self.now += self.cooling;
                self.window_used = 0;
            }
            let take = remaining.min(self.window - self.window_used);
            self.window_used += take;
            self.now += take;
            self.attempt_time += take;
            remaining -= take;
        }
        self.now - start
    }

    /// Time outside the attempt loop (local operations, messaging).
    pub fn advance(&mut self, dt: SimTime) {
        self.now += dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sr_sr() -> ScheduleConfig {
        ScheduleConfig {
            attempt_window_us: 500.0,
            doppler_window_us: 320.0,
            eit_window_us: 500.0,
            attempt_period_us: 1.191,
            success_prob: 1.236e-4,
        }
    }

    #[test]
    fn single_certain_attempt() {
        let mut cfg = sr_sr();
        cfg.success_prob = 1.0;
        let mut clock = ScheduleClock::new(&cfg).unwrap();
        assert_eq!(clock.run_attempts(1), us_to_ps(1.191));
    }

    #[test]
    fn duty_cycle_is_exact_at_window_boundaries() {
        let cfg = ScheduleConfig {
            attempt_period_us: 0.5,
            ..sr_sr()
        };
        let mut clock = ScheduleClock::new(&cfg).unwrap();
        // 1000 attempts fill one window exactly; batching must not matter
        for chunk in [1u64, 7, 300, 692, 1000, 5000] {
            clock.run_attempts(chunk);
        }
        let windows = clock.attempt_time() / us_to_ps(500.0);
        assert_eq!(clock.attempt_time() % us_to_ps(500.0), 0);
        assert_eq!(clock.now(), windows * us_to_ps(500.0) + (windows - 1) * us_to_ps(820.0));
        // counting the cooling owed after the last full window
        let duty = clock.attempt_time() as f64 / (clock.now() + us_to_ps(820.0)) as f64;
        assert!((duty - 500.0 / 1320.0).abs() < 1e-12);
        assert!((cfg.duty_cycle() - 500.0 / 1320.0).abs() < 1e-15);
    }

    #[test]
    fn batching_invariance() {
        let cfg = sr_sr();
        let mut a = ScheduleClock::new(&cfg).unwrap();
        let mut b = ScheduleClock::new(&cfg).unwrap();
        a.run_attempts(12_345);
        for _ in 0..12_345 {
            b.run_attempts(1);
        }
        assert_eq!(a.now(), b.now());
    }

    #[test]
    fn rate_inversion() {
        let cfg = sr_sr();
        let t = cfg.period_for_rate(39.31);
        assert!((t - 1.191).abs() < 1e-3);
        let cfg = ScheduleConfig { attempt_period_us: t, ..cfg };
        assert!((cfg.herald_rate_hz() - 39.31).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_probability() {
        let cfg = ScheduleConfig {
            success_prob: 1.5,
            ..sr_sr()
        };
        assert!(cfg.validate().is_err());
    }
}
