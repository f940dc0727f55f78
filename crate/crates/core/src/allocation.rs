//! Sum-rate evaluation and the allocation rules: the exhaustive-search oracle,
//! best-user decoding of an active beam set, and a greedy baseline.

use std::fmt;

use crate::error::{Error, Result};
use crate::system::{GainMatrix, SystemConfig};

/// Largest `N^K` the oracle will enumerate unless told otherwise.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// One-to-one assignment of users to beams; `None` marks an unserved user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    beam_of_user: Vec<Option<usize>>,
}

impl Allocation {
    /// Checks that every beam is below `n_beams` and used at most once.
    pub fn new(beam_of_user: Vec<Option<usize>>, n_beams: usize) -> Result<Self> {
        let mut seen = vec![false; n_beams];
        for (user, beam) in beam_of_user.iter().enumerate() {
            if let Some(b) = *beam {
                if b >= n_beams {
                    return Err(Error::Domain(format!(
                        "user {user} assigned beam {b}, only {n_beams} beams exist"
                    )));
                }
                if std::mem::replace(&mut seen[b], true) {
                    return Err(Error::Domain(format!(
                        "beam {b} assigned to more than one user"
                    )));
                }
            }
        }
        Ok(Allocation { beam_of_user })
    }

    pub fn unserved(n_users: usize) -> Self {
        Allocation {
            beam_of_user: vec![None; n_users],
        }
    }

    pub fn beam_of_user(&self) -> &[Option<usize>] {
        &self.beam_of_user
    }

    pub fn n_users(&self) -> usize {
        self.beam_of_user.len()
    }

    pub fn served(&self) -> usize {
        self.beam_of_user.iter().flatten().count()
    }

    pub fn active_set(&self) -> ActiveBeamSet {
        ActiveBeamSet::from_beams(self.beam_of_user.iter().flatten().copied())
    }
}

/// Subset of the beam grid carrying a user. Bit `n` of the mask is beam `n`.
///
/// This is the class label of the learned model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ActiveBeamSet(u64);

impl ActiveBeamSet {
    pub const EMPTY: ActiveBeamSet = ActiveBeamSet(0);

    pub fn from_beams(beams: impl IntoIterator<Item = usize>) -> Self {
        ActiveBeamSet(beams.into_iter().fold(0, |m, b| m | (1u64 << b)))
    }

    /// Fails if any bit at or above `n_beams` is set.
    pub fn from_mask(mask: u64, n_beams: usize) -> Result<Self> {
        if n_beams < 64 && mask >> n_beams != 0 {
            return Err(Error::Domain(format!(
                "mask {mask:#x} is wider than {n_beams} bits"
            )));
        }
        Ok(ActiveBeamSet(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, beam: usize) -> bool {
        beam < 64 && self.0 >> beam & 1 == 1
    }

    /// Active beams in ascending order.
    pub fn beams(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&b| self.0 >> b & 1 == 1)
    }
}

impl fmt::Display for ActiveBeamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_sinr: Vec<f64>,
    /// bits/s/Hz
    pub per_user_rate: Vec<f64>,
    /// bits/s/Hz
    pub sum_rate: f64,
}

// SINR of `user` under `beams` with the power already split per served user.
// Every rate in the crate goes through here so that the oracle and
// `evaluate_rates` agree bit for bit.
#[inline]
fn user_sinr(
    beams: &[Option<usize>],
    gains: &GainMatrix,
    user: usize,
    per_beam_power: f64,
    noise_power: f64,
) -> f64 {
    let Some(own) = beams[user] else {
        return 0.0;
    };
    let row = gains.row(user);
    let interference: f64 = beams
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != user)
        .filter_map(|(_, b)| *b)
        .map(|b| per_beam_power * row[b])
        .sum();
    per_beam_power * row[own] / (noise_power + interference)
}

#[inline]
fn per_beam_power(beams: &[Option<usize>], tx_power: f64) -> f64 {
    let served = beams.iter().flatten().count();
    if served == 0 {
        0.0
    } else {
        tx_power / served as f64
    }
}

fn sum_rate(beams: &[Option<usize>], gains: &GainMatrix, tx_power: f64, noise_power: f64) -> f64 {
    let p = per_beam_power(beams, tx_power);
    (0..beams.len())
        .map(|k| (1.0 + user_sinr(beams, gains, k, p, noise_power)).log2())
        .sum()
}

/// Rates under equal power split across served users, with total power
/// `tx_power` and noise power `noise_power` in the same linear units.
pub fn evaluate_rates_with_power(
    alloc: &Allocation,
    gains: &GainMatrix,
    tx_power: f64,
    noise_power: f64,
) -> Result<RateReport> {
    if alloc.n_users() != gains.n_users() {
        return Err(Error::Domain(format!(
            "allocation covers {} users, gain matrix has {}",
            alloc.n_users(),
            gains.n_users()
        )));
    }
    // re-validate: the gain matrix may be narrower than the grid the
    // allocation was built for
    Allocation::new(alloc.beam_of_user.clone(), gains.n_beams())?;

    let beams = alloc.beam_of_user();
    let p = per_beam_power(beams, tx_power);
    let per_user_sinr: Vec<f64> = (0..beams.len())
        .map(|k| user_sinr(beams, gains, k, p, noise_power))
        .collect();
    let per_user_rate: Vec<f64> = per_user_sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let sum_rate = per_user_rate.iter().sum();
    Ok(RateReport {
        per_user_sinr,
        per_user_rate,
        sum_rate,
    })
}

/// Rates with total power `10^(snr_db/10)` and unit noise power.
pub fn evaluate_rates(
    alloc: &Allocation,
    gains: &GainMatrix,
    config: &SystemConfig,
) -> Result<RateReport> {
    gains.check_dims(config)?;
    evaluate_rates_with_power(alloc, gains, config.snr_linear(), 1.0)
}

/// Decodes an active beam set into an allocation.
///
/// Repeatedly picks the (active beam, free user) pair with the largest gain,
/// ties going to the smaller beam and then the smaller user, until the active
/// beams or the users run out.
pub fn assign_best_users(active: ActiveBeamSet, gains: &GainMatrix) -> Allocation {
    let n_users = gains.n_users();
    let mut beams: Vec<usize> = active.beams().filter(|&b| b < gains.n_beams()).collect();
    let mut beam_of_user = vec![None; n_users];
    let mut free = vec![true; n_users];

    for _ in 0..n_users.min(beams.len()) {
        let mut best: Option<(usize, usize, f64)> = None;
        for (bi, &b) in beams.iter().enumerate() {
            for k in (0..n_users).filter(|&k| free[k]) {
                let g = gains.get(k, b);
                if best.is_none_or(|(_, _, bg)| g > bg) {
                    best = Some((bi, k, g));
                }
            }
        }
        let Some((bi, k, _)) = best else { break };
        beam_of_user[k] = Some(beams.remove(bi));
        free[k] = false;
    }
    Allocation { beam_of_user }
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub allocation: Allocation,
    pub active: ActiveBeamSet,
    pub sum_rate: f64,
}

/// Exhaustive search with [`DEFAULT_ENUMERATION_BUDGET`].
pub fn exhaustive_oracle(gains: &GainMatrix, config: &SystemConfig) -> Result<OracleSolution> {
    exhaustive_oracle_with_budget(gains, config, DEFAULT_ENUMERATION_BUDGET)
}

/// Enumerates every one-to-one mapping of users into beams, each user also
/// allowed to stay unserved, and returns the one with the largest sum rate.
///
/// Exact ties go to the lexicographically smallest `beam_of_user`, with
/// "unserved" ordered after every beam. Refuses when `N^K > budget`.
pub fn exhaustive_oracle_with_budget(
    gains: &GainMatrix,
    config: &SystemConfig,
    budget: u128,
) -> Result<OracleSolution> {
    gains.check_dims(config)?;
    let n_beams = config.n_beams();
    let n_users = config.n_users();
    check_budget(n_beams, n_users, budget)?;

    let mut search = Search {
        gains,
        tx_power: config.snr_linear(),
        n_beams,
        current: vec![None; n_users],
        best: vec![None; n_users],
        best_rate: f64::NEG_INFINITY,
    };
    search.descend(0, 0);

    let allocation = Allocation {
        beam_of_user: search.best,
    };
    Ok(OracleSolution {
        active: allocation.active_set(),
        allocation,
        sum_rate: search.best_rate,
    })
}

/// Refuses configurations whose `N^K` exceeds `budget`.
pub fn check_budget(n_beams: usize, n_users: usize, budget: u128) -> Result<()> {
    let candidates = (n_beams as u128)
        .checked_pow(n_users as u32)
        .unwrap_or(u128::MAX);
    if candidates > budget {
        return Err(Error::BudgetExceeded {
            n_beams,
            n_users,
            candidates,
            budget,
        });
    }
    Ok(())
}

struct Search<'a> {
    gains: &'a GainMatrix,
    tx_power: f64,
    n_beams: usize,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_rate: f64,
}

impl Search<'_> {
    // Depth-first in lexicographic order, so a strict improvement test keeps
    // the smallest mapping among exact ties.
    fn descend(&mut self, user: usize, used: u64) {
        if user == self.current.len() {
            let rate = sum_rate(&self.current, self.gains, self.tx_power, 1.0);
            if rate > self.best_rate {
                self.best_rate = rate;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        for b in 0..self.n_beams {
            if used >> b & 1 == 0 {
                self.current[user] = Some(b);
                self.descend(user + 1, used | 1 << b);
            }
        }
        self.current[user] = None;
        self.descend(user + 1, used);
    }
}

/// Stand-in for a low-complexity beam allocation heuristic.
///
/// Users are visited in descending order of their strongest beam gain (ties
/// to the smaller user index); each claims its best still-free beam (ties to
/// the smaller beam index). Every user is served when `N >= K`.
pub fn greedy_baseline(gains: &GainMatrix) -> Allocation {
    let n_users = gains.n_users();
    let peak = |k: usize| {
        gains
            .row(k)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut order: Vec<usize> = (0..n_users).collect();
    order.sort_by(|&a, &b| peak(b).total_cmp(&peak(a)));

    let mut claimed = vec![false; gains.n_beams()];
    let mut beam_of_user = vec![None; n_users];
    for k in order {
        let choice =
            (0..gains.n_beams())
                .filter(|&b| !claimed[b])
                .fold(None, |best: Option<usize>, b| match best {
                    Some(c) if gains.get(k, c) >= gains.get(k, b) => Some(c),
                    _ => Some(b),
                });
        if let Some(b) = choice {
            claimed[b] = true;
            beam_of_user[k] = Some(b);
        }
    }
    Allocation { beam_of_user }
}
