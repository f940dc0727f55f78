//! Cell geometry, the fixed-beam pattern of a Butler-fed linear array, and
//! line-of-sight channel gains.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Widest supported beam grid; labels are stored as 64-bit masks.
pub const MAX_BEAMS: usize = 64;

/// Cell, array and power parameters shared by every layout of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    n_beams: usize,
    n_users: usize,
    snr_db: f64,
    path_loss_exponent: f64,
    min_radius: f64,
    rng_seed: u64,
}

impl SystemConfig {
    pub const DEFAULT_SNR_DB: f64 = 20.0;
    pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;
    pub const DEFAULT_MIN_RADIUS: f64 = 0.01;

    /// A configuration with `n_beams` beams and `n_users` users and default
    /// SNR (20 dB), path-loss exponent (2), radius clamp (0.01) and seed (0).
    pub fn new(n_beams: usize, n_users: usize) -> Result<Self> {
        Self::from_parts(
            n_beams,
            n_users,
            Self::DEFAULT_SNR_DB,
            Self::DEFAULT_PATH_LOSS_EXPONENT,
            Self::DEFAULT_MIN_RADIUS,
            0,
        )
    }

    pub fn from_parts(
        n_beams: usize,
        n_users: usize,
        snr_db: f64,
        path_loss_exponent: f64,
        min_radius: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::InvalidConfig("n_users must be positive".into()));
        }
        if n_beams < n_users {
            return Err(Error::InvalidConfig(format!(
                "n_beams ({n_beams}) must be at least n_users ({n_users})"
            )));
        }
        if n_beams > MAX_BEAMS {
            return Err(Error::InvalidConfig(format!(
                "n_beams ({n_beams}) exceeds the supported maximum of {MAX_BEAMS}"
            )));
        }
        if !snr_db.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "snr_db must be finite, got {snr_db}"
            )));
        }
        if !(path_loss_exponent.is_finite() && path_loss_exponent >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "path_loss_exponent must be finite and >= 0, got {path_loss_exponent}"
            )));
        }
        if !(min_radius > 0.0 && min_radius < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "min_radius must lie in (0, 1), got {min_radius}"
            )));
        }
        Ok(SystemConfig {
            n_beams,
            n_users,
            snr_db,
            path_loss_exponent,
            min_radius,
            rng_seed,
        })
    }

    pub fn with_snr_db(self, snr_db: f64) -> Result<Self> {
        Self::from_parts(
            self.n_beams,
            self.n_users,
            snr_db,
            self.path_loss_exponent,
            self.min_radius,
            self.rng_seed,
        )
    }

    pub fn with_path_loss_exponent(self, alpha: f64) -> Result<Self> {
        Self::from_parts(
            self.n_beams,
            self.n_users,
            self.snr_db,
            alpha,
            self.min_radius,
            self.rng_seed,
        )
    }

    pub fn with_min_radius(self, min_radius: f64) -> Result<Self> {
        Self::from_parts(
            self.n_beams,
            self.n_users,
            self.snr_db,
            self.path_loss_exponent,
            min_radius,
            self.rng_seed,
        )
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Total transmit power over noise power, linear.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn min_radius(&self) -> f64 {
        self.min_radius
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

/// Polar position of one user; `theta` is measured from the array axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPosition {
    pub rho: f64,
    pub theta: f64,
}

/// One scenario: the positions of all users in the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLayout {
    layout_id: u64,
    positions: Vec<UserPosition>,
}

impl UserLayout {
    /// Builds a layout after checking it against `config`: exactly `n_users`
    /// entries, `rho` in `[min_radius, 1]` and `theta` strictly inside `(0, pi)`.
    pub fn new(
        layout_id: u64,
        positions: Vec<UserPosition>,
        config: &SystemConfig,
    ) -> Result<Self> {
        if positions.len() != config.n_users() {
            return Err(Error::Domain(format!(
                "layout has {} users, configuration expects {}",
                positions.len(),
                config.n_users()
            )));
        }
        for (k, p) in positions.iter().enumerate() {
            if !(p.rho >= config.min_radius() && p.rho <= 1.0) {
                return Err(Error::Domain(format!(
                    "user {k}: rho = {} outside [{}, 1]",
                    p.rho,
                    config.min_radius()
                )));
            }
            if !(p.theta > 0.0 && p.theta < PI) {
                return Err(Error::Domain(format!(
                    "user {k}: theta = {} outside (0, pi)",
                    p.theta
                )));
            }
        }
        Ok(UserLayout {
            layout_id,
            positions,
        })
    }

    pub fn layout_id(&self) -> u64 {
        self.layout_id
    }

    pub fn positions(&self) -> &[UserPosition] {
        &self.positions
    }

    pub fn n_users(&self) -> usize {
        self.positions.len()
    }
}

/// Draws the layout identified by `(config.rng_seed(), layout_id)`.
///
/// Each layout has its own ChaCha stream, so the result does not depend on
/// which other layouts were drawn before it or on which thread.
pub fn sample_layout(config: &SystemConfig, layout_id: u64) -> UserLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed());
    rng.set_stream(layout_id);

    let positions = (0..config.n_users())
        .map(|_| {
            // random::<f64>() is in [0, 1); flip it to (0, 1].
            let u1 = 1.0 - rng.random::<f64>();
            let rho = u1.sqrt().max(config.min_radius());
            let theta = loop {
                let theta = rng.random::<f64>() * PI;
                if theta > 0.0 && theta < PI {
                    break theta;
                }
            };
            UserPosition { rho, theta }
        })
        .collect();

    UserLayout {
        layout_id,
        positions,
    }
}

/// Normalized Dirichlet kernel `sin(N psi / 2) / (N sin(psi / 2))`.
///
/// At `psi = 2 pi m` the analytic limit `(-1)^(m (N - 1))` is returned.
pub fn beam_kernel(psi: f64, n_beams: usize) -> f64 {
    let n = n_beams as f64;
    let den = n * (psi / 2.0).sin();
    if den.abs() < 1e-12 {
        let m = (psi / (2.0 * PI)).round() as i64;
        let odd = (m.rem_euclid(2) == 1) && n_beams.is_multiple_of(2);
        return if odd { -1.0 } else { 1.0 };
    }
    ((n * psi / 2.0).sin() / den).clamp(-1.0, 1.0)
}

/// Direction cosine at which beam `beam` (0-based) peaks: `(2 beam + 1 - N) / N`.
pub fn steering_cosine(beam: usize, n_beams: usize) -> f64 {
    (2.0 * beam as f64 + 1.0 - n_beams as f64) / n_beams as f64
}

pub(crate) fn pattern(cos_theta: f64, beam: usize, n_beams: usize) -> f64 {
    let d = beam_kernel(PI * (cos_theta - steering_cosine(beam, n_beams)), n_beams);
    d * d
}

/// Power gain of beam `beam` (0-based) in direction `theta`, in `[0, 1]`.
pub fn beam_gain(theta: f64, beam: usize, config: &SystemConfig) -> Result<f64> {
    if beam >= config.n_beams() {
        return Err(Error::Domain(format!(
            "beam index {beam} out of range for {} beams",
            config.n_beams()
        )));
    }
    Ok(pattern(theta.cos(), beam, config.n_beams()))
}

/// `K x N` matrix of beam power gains, path loss included.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    n_users: usize,
    n_beams: usize,
    gains: Vec<f64>,
    source_layout_id: u64,
}

impl GainMatrix {
    /// Builds a matrix from explicit rows. Every row must have the same
    /// length and every entry must be finite and nonnegative.
    pub fn from_rows(rows: &[Vec<f64>], source_layout_id: u64) -> Result<Self> {
        let n_users = rows.len();
        let n_beams = rows.first().map_or(0, Vec::len);
        if n_users == 0 || n_beams == 0 {
            return Err(Error::Domain("gain matrix must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != n_beams) {
            return Err(Error::Domain("gain matrix rows differ in length".into()));
        }
        let gains: Vec<f64> = rows.iter().flatten().copied().collect();
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Domain(
                "gain matrix entries must be finite and nonnegative".into(),
            ));
        }
        Ok(GainMatrix {
            n_users,
            n_beams,
            gains,
            source_layout_id,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn source_layout_id(&self) -> u64 {
        self.source_layout_id
    }

    #[inline]
    pub fn get(&self, user: usize, beam: usize) -> f64 {
        self.gains[user * self.n_beams + beam]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.gains[user * self.n_beams..(user + 1) * self.n_beams]
    }

    pub(crate) fn check_dims(&self, config: &SystemConfig) -> Result<()> {
        if self.n_users != config.n_users() || self.n_beams != config.n_beams() {
            return Err(Error::Domain(format!(
                "gain matrix is {}x{}, configuration is {}x{}",
                self.n_users,
                self.n_beams,
                config.n_users(),
                config.n_beams()
            )));
        }
        Ok(())
    }
}

/// Line-of-sight gains: entry `(k, n)` is `rho_k^-alpha * beam_gain(theta_k, n)`.
pub fn channel_gain_matrix(layout: &UserLayout, config: &SystemConfig) -> Result<GainMatrix> {
    if layout.n_users() != config.n_users() {
        return Err(Error::Domain(format!(
            "layout has {} users, configuration expects {}",
            layout.n_users(),
            config.n_users()
        )));
    }
    let n_beams = config.n_beams();
    let alpha = config.path_loss_exponent();
    let mut gains = Vec::with_capacity(layout.n_users() * n_beams);
    for p in layout.positions() {
        let path_loss = p.rho.powf(-alpha);
        let c = p.theta.cos();
        gains.extend((0..n_beams).map(|n| path_loss * pattern(c, n, n_beams)));
    }
    Ok(GainMatrix {
        n_users: layout.n_users(),
        n_beams,
        gains,
        source_layout_id: layout.layout_id(),
    })
}
