//! Uniform-grid history of the quantities a delay system looks back into.
//!
//! Four channels are recorded at every accepted step: the delayed activator
//! approximation `A^tau`, the auxiliary activator level `A^s`, and the two
//! state variables `R` and `C`. Lookups before the start of the grid return
//! per-channel constant values (the initial conditions extended to all
//! earlier times); interior lookups interpolate linearly between adjacent
//! samples. A single provisional sample past the committed grid supports
//! implicit stepping; lookups never reach beyond it.

use thiserror::Error;

/// Channels stored per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Delayed activator approximation `A^tau(t)`.
    ATau,
    /// Auxiliary activator level `A^s(t)`.
    AS,
    /// Repressor copy number.
    R,
    /// Complex copy number.
    C,
}

/// One grid point of recorded values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub a_tau: f64,
    pub a_s: f64,
    pub r: f64,
    pub c: f64,
}

impl Sample {
    pub fn get(&self, ch: Channel) -> f64 {
        match ch {
            Channel::ATau => self.a_tau,
            Channel::AS => self.a_s,
            Channel::R => self.r,
            Channel::C => self.c,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HistoryError {
    #[error("history lookup at t = {t} h reaches beyond the newest sample at t = {newest} h")]
    BeyondNewest { t: f64, newest: f64 },
    #[error("history lookup at t = {t} h on an empty grid")]
    Empty { t: f64 },
}

/// Uniform-grid store with constant pre-grid extension and one provisional
/// sample.
#[derive(Debug, Clone)]
pub struct HistoryStore {
    t0: f64,
    dt: f64,
    pre0: Sample,
    samples: Vec<Sample>,
    provisional: Option<Sample>,
}

impl HistoryStore {
    /// Creates an empty store; `pre0` is returned for every lookup at
    /// `t <= t0`.
    pub fn new(t0: f64, dt: f64, pre0: Sample) -> Self {
        assert!(dt > 0.0, "history grid step must be positive");
        Self {
            t0,
            dt,
            pre0,
            samples: Vec::new(),
            provisional: None,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of committed grid points.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Constant value used for all times at or before the grid start.
    pub fn pre0(&self, ch: Channel) -> f64 {
        self.pre0.get(ch)
    }

    /// Newest committed sample.
    pub fn last(&self, ch: Channel) -> f64 {
        self.samples
            .last()
            .map(|s| s.get(ch))
            .unwrap_or_else(|| self.pre0.get(ch))
    }

    /// Time of the newest sample, provisional included.
    pub fn newest_time(&self) -> f64 {
        let mut idx = self.samples.len();
        if self.provisional.is_some() {
            idx += 1;
        }
        // With n committed samples the newest committed index is n - 1.
        self.t0 + (idx.saturating_sub(1)) as f64 * self.dt
    }

    /// Appends a committed sample at the next grid point and drops any
    /// provisional value.
    pub fn push(&mut self, sample: Sample) {
        self.provisional = None;
        self.samples.push(sample);
    }

    /// Installs or replaces the provisional sample one grid point past the
    /// committed range.
    pub fn set_provisional(&mut self, sample: Sample) {
        self.provisional = Some(sample);
    }

    pub fn clear_provisional(&mut self) {
        self.provisional = None;
    }

    fn value_at(&self, idx: usize, ch: Channel) -> f64 {
        if idx < self.samples.len() {
            self.samples[idx].get(ch)
        } else {
            self.provisional
                .expect("index past committed range requires a provisional sample")
                .get(ch)
        }
    }

    /// Linear-interpolation lookup.
    ///
    /// `t <= t0` returns the constant pre-grid value; otherwise `t` must not
    /// exceed the newest (committed or provisional) grid point.
    pub fn lookup(&self, ch: Channel, t: f64) -> Result<f64, HistoryError> {
        if t <= self.t0 {
            return Ok(self.pre0.get(ch));
        }
        let newest = match (self.samples.len(), self.provisional.is_some()) {
            (0, false) => return Err(HistoryError::Empty { t }),
            (n, false) => n - 1,
            (n, true) => n,
        };
        let u = (t - self.t0) / self.dt;
        // Tolerate round-off at the newest grid point itself.
        if u > newest as f64 {
            if u - newest as f64 <= 1e-9 {
                return Ok(self.value_at(newest, ch));
            }
            return Err(HistoryError::BeyondNewest {
                t,
                newest: self.t0 + newest as f64 * self.dt,
            });
        }
        let i = u.floor() as usize;
        let frac = u - i as f64;
        if i >= newest {
            return Ok(self.value_at(newest, ch));
        }
        let lo = self.value_at(i, ch);
        let hi = self.value_at(i + 1, ch);
        Ok(lo + frac * (hi - lo))
    }
}
