//! Invertible driving dynamics on the base space.
//!
//! Two bases are supported: an irrational rotation of the circle and a
//! two-sided shift over a seeded, pre-generated symbol window. Both produce
//! exact bi-infinite (well, window-bounded) orbits.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// The golden mean rotation number `(√5 − 1)/2`.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Default half-width of the random symbol window.
pub const DEFAULT_WINDOW: i64 = 2_000_000;

/// Reduces `x` into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid may round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of the base space.
///
/// Circle points remember the anchor they were created from and the number
/// of rotation steps applied, so that `advance(advance(θ, k), −k)` restores
/// the original point bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasePoint {
    Circle { anchor: f64, steps: i64, angle: f64 },
    Symbol(i64),
}

impl BasePoint {
    pub fn angle(x: f64) -> Self {
        let a = wrap_unit(x);
        BasePoint::Circle { anchor: a, steps: 0, angle: a }
    }

    pub fn index(i: i64) -> Self {
        BasePoint::Symbol(i)
    }

    /// The angle in `[0,1)` for circle points.
    pub fn as_angle(&self) -> Option<f64> {
        match *self {
            BasePoint::Circle { angle, .. } => Some(angle),
            BasePoint::Symbol(_) => None,
        }
    }

    pub fn as_index(&self) -> Option<i64> {
        match *self {
            BasePoint::Symbol(i) => Some(i),
            BasePoint::Circle { .. } => None,
        }
    }

    /// A scalar coordinate for output: the angle or the symbol index.
    pub fn coordinate(&self) -> f64 {
        match *self {
            BasePoint::Circle { angle, .. } => angle,
            BasePoint::Symbol(i) => i as f64,
        }
    }
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePoint::Circle { angle, .. } => write!(f, "θ={angle}"),
            BasePoint::Symbol(i) => write!(f, "index {i}"),
        }
    }
}

/// Seeded two-sided symbol sequence on `[-window, window]`.
#[derive(Clone, PartialEq)]
pub struct SymbolShift {
    seed: u64,
    window: i64,
    alphabet_size: usize,
    symbols: Arc<[u16]>,
}

impl fmt::Debug for SymbolShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolShift")
            .field("seed", &self.seed)
            .field("window", &self.window)
            .field("alphabet_size", &self.alphabet_size)
            .finish_non_exhaustive()
    }
}

impl SymbolShift {
    /// Generates the full window from `seed` (uniform i.i.d. symbols).
    pub fn new(seed: u64, window: i64, alphabet_size: usize) -> Result<Self> {
        if window < 0 {
            return Err(Error::invalid("window", "must be non-negative"));
        }
        if alphabet_size == 0 || alphabet_size > u16::MAX as usize {
            return Err(Error::invalid("alphabet_size", format!("{alphabet_size} outside 1..=65535")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 2 * window as usize + 1;
        let symbols: Arc<[u16]> = (0..len).map(|_| rng.gen_range(0..alphabet_size) as u16).collect();
        Ok(SymbolShift { seed, window, alphabet_size, symbols })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Symbol at position `i` of the sequence.
    pub fn symbol(&self, i: i64) -> Result<usize> {
        self.check(i)?;
        Ok(self.symbols[(i + self.window) as usize] as usize)
    }

    fn check(&self, i: i64) -> Result<()> {
        if i.abs() > self.window {
            Err(Error::WindowOverflow { index: i, window: self.window })
        } else {
            Ok(())
        }
    }
}

/// Driving dynamics γ on Θ.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseSystem {
    CircleRotation { rho: f64 },
    RandomShift(SymbolShift),
}

impl BaseSystem {
    pub fn golden_rotation() -> Self {
        BaseSystem::CircleRotation { rho: GOLDEN_MEAN }
    }

    pub fn random(seed: u64, window: i64, alphabet_size: usize) -> Result<Self> {
        SymbolShift::new(seed, window, alphabet_size).map(BaseSystem::RandomShift)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BaseSystem::CircleRotation { .. } => "circle rotation",
            BaseSystem::RandomShift(_) => "random shift",
        }
    }

    /// The canonical starting point: angle 0 or index 0.
    pub fn origin(&self) -> BasePoint {
        match self {
            BaseSystem::CircleRotation { .. } => BasePoint::angle(0.0),
            BaseSystem::RandomShift(_) => BasePoint::Symbol(0),
        }
    }

    /// Checks that `theta` is a point of this base.
    pub fn check_point(&self, theta: &BasePoint) -> Result<()> {
        match (self, theta) {
            (BaseSystem::CircleRotation { .. }, BasePoint::Circle { .. }) => Ok(()),
            (BaseSystem::RandomShift(s), BasePoint::Symbol(i)) => s.check(*i),
            _ => Err(Error::IncompatibleBasePoint { point: theta.to_string(), system: self.kind() }),
        }
    }

    /// γᵏ(θ).
    pub fn advance(&self, theta: &BasePoint, k: i64) -> Result<BasePoint> {
        match (self, *theta) {
            (BaseSystem::CircleRotation { rho }, BasePoint::Circle { anchor, steps, .. }) => {
                let steps = steps.checked_add(k).ok_or_else(|| Error::invalid("k", "step count overflow"))?;
                Ok(BasePoint::Circle { anchor, steps, angle: wrap_unit(anchor + steps as f64 * rho) })
            }
            (BaseSystem::RandomShift(s), BasePoint::Symbol(i)) => {
                let j = i.checked_add(k).ok_or(Error::WindowOverflow { index: i64::MAX, window: s.window })?;
                s.check(j)?;
                Ok(BasePoint::Symbol(j))
            }
            _ => Err(Error::IncompatibleBasePoint { point: theta.to_string(), system: self.kind() }),
        }
    }

    /// `[γ^{-n_back}θ₀, …, θ₀, …, γ^{n_fwd}θ₀]`.
    pub fn orbit(&self, theta0: &BasePoint, n_back: usize, n_fwd: usize) -> Result<Vec<BasePoint>> {
        let lo = -(n_back as i64);
        let hi = n_fwd as i64;
        (lo..=hi).map(|k| self.advance(theta0, k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle_of(p: BasePoint) -> f64 {
        p.as_angle().unwrap()
    }

    #[test]
    fn rotation_quarter_step() {
        let sys = BaseSystem::CircleRotation { rho: 0.25 };
        let p = sys.advance(&BasePoint::angle(0.9), 1).unwrap();
        assert!((angle_of(p) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let sys = BaseSystem::golden_rotation();
        let p = BasePoint::angle(0.3);
        assert_eq!(sys.advance(&p, 0).unwrap(), p);
        let r = BaseSystem::random(1, 10, 3).unwrap();
        assert_eq!(r.advance(&BasePoint::Symbol(4), 0).unwrap(), BasePoint::Symbol(4));
    }

    #[test]
    fn golden_two_steps() {
        let sys = BaseSystem::golden_rotation();
        let p = sys.advance(&BasePoint::angle(0.0), 2).unwrap();
        let expected = (2.0 * ((5f64).sqrt() - 1.0) / 2.0) % 1.0;
        assert!((angle_of(p) - expected).abs() < 1e-15);
        assert!((angle_of(p) - 0.23607).abs() < 1e-5);
    }

    #[test]
    fn golden_constant_is_full_precision() {
        assert_eq!(GOLDEN_MEAN, (5f64.sqrt() - 1.0) / 2.0);
    }

    #[test]
    fn round_trip_is_exact() {
        let sys = BaseSystem::golden_rotation();
        let p = BasePoint::angle(0.123);
        for k in [1, 17, 10_000, 2_000_000] {
            let q = sys.advance(&sys.advance(&p, k).unwrap(), -k).unwrap();
            assert_eq!(q, p);
        }
    }

    #[test]
    fn orbit_examples() {
        let sys = BaseSystem::CircleRotation { rho: 0.5 };
        let o = sys.orbit(&BasePoint::angle(0.0), 1, 1).unwrap();
        let angles: Vec<f64> = o.iter().map(|p| angle_of(*p)).collect();
        assert_eq!(angles, vec![0.5, 0.0, 0.5]);

        let g = BaseSystem::golden_rotation();
        assert_eq!(g.orbit(&BasePoint::angle(0.4), 0, 0).unwrap(), vec![BasePoint::angle(0.4)]);

        let r = BaseSystem::random(7, 100, 2).unwrap();
        let o = r.orbit(&BasePoint::Symbol(0), 3, 3).unwrap();
        let idx: Vec<i64> = o.iter().map(|p| p.as_index().unwrap()).collect();
        assert_eq!(idx, (-3..=3).collect::<Vec<_>>());
    }

    #[test]
    fn orbit_matches_repeated_single_steps() {
        let sys = BaseSystem::golden_rotation();
        let p0 = BasePoint::angle(0.77);
        let orbit = sys.orbit(&p0, 0, 500).unwrap();
        let mut x = 0.77f64;
        for p in orbit {
            assert!((angle_of(p) - x).abs() < 1e-12);
            x = wrap_unit(x + GOLDEN_MEAN);
        }
    }

    #[test]
    fn window_overflow_is_reported() {
        let r = BaseSystem::random(3, 5, 2).unwrap();
        assert!(matches!(r.advance(&BasePoint::Symbol(4), 2), Err(Error::WindowOverflow { index: 6, window: 5 })));
        assert!(r.orbit(&BasePoint::Symbol(0), 6, 0).is_err());
    }

    #[test]
    fn symbols_are_seed_determined() {
        let a = SymbolShift::new(42, 1000, 3).unwrap();
        let b = SymbolShift::new(42, 1000, 3).unwrap();
        let c = SymbolShift::new(43, 1000, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((-1000..=1000).all(|i| a.symbol(i).unwrap() < 3));
    }

    #[test]
    fn mismatched_point_is_rejected() {
        let sys = BaseSystem::golden_rotation();
        assert!(matches!(sys.advance(&BasePoint::Symbol(0), 1), Err(Error::IncompatibleBasePoint { .. })));
    }

    #[test]
    fn wrap_handles_tiny_negatives() {
        let w = wrap_unit(-1e-18);
        assert!((0.0..1.0).contains(&w));
    }
}
