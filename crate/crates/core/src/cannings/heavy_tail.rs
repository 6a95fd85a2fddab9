use rand::Rng;

use super::CanningsError;
use crate::math;

/// Offspring potential `X` with `P(X >= k) = min(1, C k^(-α))`, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailLaw {
    alpha: f64,
    c: f64,
    mean: f64,
}

/// Terms summed explicitly before the Euler-Maclaurin tail.
const MEAN_TERMS: u64 = 4096;

impl HeavyTailLaw {
    pub fn new(alpha: f64, c: f64) -> Result<Self, CanningsError> {
        if !(alpha >= 1.0 && alpha < 2.0) || !(c >= 1.0 && c.is_finite()) {
            return Err(CanningsError::Tail { alpha, c });
        }
        let mut law = HeavyTailLaw {
            alpha,
            c,
            mean: f64::INFINITY,
        };
        if alpha > 1.0 {
            law.mean = law.compute_mean();
        }
        Ok(law)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `μ = Σ_k S(k)`, infinite at `α = 1`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `S(k) = P(X >= k)`.
    pub fn survival(&self, k: u64) -> f64 {
        if k <= 1 {
            1.0
        } else {
            (self.c * math::pow(k as f64, -self.alpha)).min(1.0)
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.survival(k) - self.survival(k + 1)
        }
    }

    fn compute_mean(&self) -> f64 {
        let start = (math::ceil(math::pow(self.c, 1.0 / self.alpha)) as u64).max(MEAN_TERMS);
        let head = math::compensated((1..start).map(|k| self.survival(k)));
        // Σ_{k >= start} f(k) for f(x) = C x^(-α)
        let (a, x, c) = (self.alpha, start as f64, self.c);
        let f = c * math::pow(x, -a);
        let integral = c * math::pow(x, 1.0 - a) / (a - 1.0);
        let d1 = -a * f / x;
        let d3 = -a * (a + 1.0) * (a + 2.0) * f / (x * x * x);
        head + integral + f / 2.0 - d1 / 12.0 + d3 / 720.0
    }

    /// Inversion: largest `k` with `S(k) > V` for `V` uniform on `(0, 1]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let v = 1.0 - rng.random::<f64>();
        self.quantile(v)
    }

    pub fn quantile(&self, v: f64) -> u64 {
        let root = math::pow(self.c / v, 1.0 / self.alpha);
        let mut k = if root >= 9.0e18 {
            9_000_000_000_000_000_000
        } else {
            (math::ceil(root) as u64).saturating_sub(1).max(1)
        };
        while self.survival(k + 1) > v {
            k += 1;
        }
        while k > 1 && self.survival(k) <= v {
            k -= 1;
        }
        k
    }
}
