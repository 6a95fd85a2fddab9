//! Scalar helpers that work without `std`.

pub(crate) use libm::{ceil, exp, expm1, fabs, floor, lgamma, log, log1p, pow, round, sqrt};

/// Binomial coefficients are evaluated exactly by products up to this size and
/// through `lgamma` above it.
pub(crate) const EXACT_BINOMIAL_LIMIT: u64 = 60;

pub(crate) fn ln(x: f64) -> f64 {
    log(x)
}

pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        return ln(choose_exact(n, k));
    }
    let (n, k) = (n as f64, k as f64);
    lgamma(n + 1.0) - lgamma(k + 1.0) - lgamma(n - k + 1.0)
}

pub(crate) fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        choose_exact(n, k)
    } else {
        exp(ln_choose(n, k))
    }
}

fn choose_exact(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    round(acc)
}

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Falling factorial `(x)_k = x (x-1) ... (x-k+1)`.
pub(crate) fn falling(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= x - i as f64;
    }
    acc
}

/// `x^y` with the convention `0^0 = 1`.
pub(crate) fn powi_zero(x: f64, y: u64) -> f64 {
    if y == 0 {
        1.0
    } else {
        pow(x, y as f64)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub(crate) fn compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(sum(exp(x_i)))` over a slice, ignoring `-inf` entries.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ln(compensated(values.iter().map(|&v| exp(v - max))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_log_binomials_agree() {
        for n in [10u64, 59, 60, 61, 200] {
            for k in [0, 1, 2, n / 2, n - 1, n] {
                let direct = (0..k).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                let rel = (choose(n, k) - direct).abs() / direct;
                assert!(rel < 1e-11, "n={n} k={k} rel={rel}");
            }
        }
        assert_eq!(choose(4, 2), 6.0);
        assert_eq!(choose(3, 4), 0.0);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(8.0, 3), 336.0);
        assert_eq!(falling(2.0, 3), 0.0);
        assert_eq!(falling(5.0, 0), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = alloc::vec![1.0e16, 1.0, -1.0e16];
        xs.extend(core::iter::repeat(1.0).take(9));
        assert_eq!(compensated(xs), 10.0);
    }
}
