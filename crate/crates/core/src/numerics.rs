//! Floating helpers shared by the closed-form evaluators: exact-integer to
//! float conversion, logarithms of big integers and compensated log-space
//! summation.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Natural logarithm of an exact nonnegative integer. Returns `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Product of machine-sized factors, batched in `u64` before touching the
/// big integer.
pub fn product_biguint<I: IntoIterator<Item = u64>>(factors: I) -> BigUint {
    let mut acc = BigUint::one();
    let mut chunk: u64 = 1;
    for f in factors {
        match chunk.checked_mul(f) {
            Some(c) => chunk = c,
            None => {
                acc *= chunk;
                chunk = f;
            }
        }
    }
    acc * chunk
}

/// Lossy conversion of an exact integer; `inf` when out of range.
pub fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// ln(n!) by direct summation of logarithms.
pub fn ln_factorial(n: u64) -> f64 {
    let mut acc = KahanSum::default();
    for k in 2..=n {
        acc.add((k as f64).ln());
    }
    acc.value()
}

/// ln C(n, k); `-inf` when k > n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = KahanSum::default();
    for i in 0..k {
        acc.add(((n - i) as f64).ln() - ((i + 1) as f64).ln());
    }
    acc.value()
}

/// Kahan-Babuska compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Streaming `ln(sum_i exp(x_i))`.
///
/// Terms are exponentiated relative to the running maximum and accumulated
/// with compensation; the partial sum is rescaled whenever a new maximum
/// arrives.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    acc: KahanSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            acc: KahanSum::default(),
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.max {
            if self.max > f64::NEG_INFINITY {
                let scale = (self.max - ln_term).exp();
                self.acc.sum *= scale;
                self.acc.comp *= scale;
            }
            self.max = ln_term;
        }
        self.acc.add((ln_term - self.max).exp());
    }

    /// Logarithm of the accumulated sum; `-inf` for an empty sum.
    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + self.acc.value().ln()
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}
