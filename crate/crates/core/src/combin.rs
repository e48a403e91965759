//! Small exact-combinatorics helpers shared across the crate.

/// Binomial coefficient C(n, k) as u64. Values used in this crate stay far
/// below u64::MAX (cells live on a few hundred vertices at most).
pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// C(n, k) as f64, for expectation formulas.
pub fn binom_f64(n: u64, k: u64) -> f64 {
    binom(n, k) as f64
}

/// Catalan number C_m = C(2m, m) / (m + 1).
pub fn catalan(m: u64) -> u64 {
    binom(2 * m, m) / (m + 1)
}

/// Falling factorial n (n-1) ... (n-s+1) as u128.
pub fn falling(n: u64, s: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..s {
        acc *= (n - i) as u128;
    }
    acc
}

/// Factorial as u128; inputs stay tiny (cell dimensions).
pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_basics() {
        assert_eq!(binom(5, 3), 10);
        assert_eq!(binom(300, 2), 44850);
        assert_eq!(binom(4, 0), 1);
        assert_eq!(binom(3, 4), 0);
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(catalan(1), 1);
        assert_eq!(catalan(2), 2);
        assert_eq!(catalan(3), 5);
        assert_eq!(catalan(4), 14);
    }

    #[test]
    fn falling_and_factorial() {
        assert_eq!(falling(4, 3), 24);
        assert_eq!(factorial(4), 24);
        assert_eq!(falling(10, 0), 1);
    }
}
