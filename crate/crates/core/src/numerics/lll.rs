//! LLL reduction of integer lattices with exact rational Gram–Schmidt data.

use rug::{Integer, Rational};

/// Lovász parameter used throughout the crate.
pub fn default_delta() -> Rational {
    Rational::from((99, 100))
}

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    a.iter().zip(b).map(|(x, y)| Integer::from(x * y)).sum()
}

fn round_rational(q: &Rational) -> Integer {
    // Nearest integer, ties toward +inf.
    let num = Integer::from(q.numer() * 2) + q.denom();
    let den = Integer::from(q.denom() * 2);
    num.div_rem_floor(den).0
}

struct GramSchmidt {
    mu: Vec<Vec<Rational>>,
    bnorm: Vec<Rational>,
}

fn gram_schmidt(b: &[Vec<Integer>]) -> GramSchmidt {
    let n = b.len();
    let mut mu = vec![vec![Rational::new(); n]; n];
    let mut bnorm = vec![Rational::new(); n];
    // Inner products ⟨b_i, b*_j⟩ via the recurrence on μ.
    for i in 0..n {
        for j in 0..i {
            let mut r = Rational::from(dot(&b[i], &b[j]));
            for k in 0..j {
                r -= Rational::from(&mu[j][k] * &mu[i][k]) * &bnorm[k];
            }
            mu[i][j] = if bnorm[j] == 0 { Rational::new() } else { r / &bnorm[j] };
        }
        let mut r = Rational::from(dot(&b[i], &b[i]));
        for k in 0..i {
            r -= Rational::from(mu[i][k].square_ref()) * &bnorm[k];
        }
        bnorm[i] = r;
    }
    GramSchmidt { mu, bnorm }
}

/// LLL-reduces the rows of `basis` (assumed linearly independent).
pub fn lll_reduce(mut b: Vec<Vec<Integer>>, delta: &Rational) -> Vec<Vec<Integer>> {
    let n = b.len();
    if n < 2 {
        return b;
    }
    let GramSchmidt { mut mu, mut bnorm } = gram_schmidt(&b);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = round_rational(&mu[k][j]);
            if q != 0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= Integer::from(&q * y);
                }
                for i in 0..j {
                    let t = Rational::from(&mu[j][i] * &q);
                    mu[k][i] -= t;
                }
                mu[k][j] -= Rational::from(q);
            }
        }
        let lhs = bnorm[k].clone();
        let rhs = Rational::from(delta - Rational::from(mu[k][k - 1].square_ref())) * &bnorm[k - 1];
        if lhs >= rhs {
            k += 1;
            continue;
        }
        // Swap b_k and b_{k-1}, updating the Gram–Schmidt data in place.
        b.swap(k, k - 1);
        let m = mu[k][k - 1].clone();
        let big_b = Rational::from(&bnorm[k] + Rational::from(m.square_ref()) * &bnorm[k - 1]);
        if big_b == 0 {
            k = (k - 1).max(1);
            continue;
        }
        let new_mu = Rational::from(&m * &bnorm[k - 1]) / &big_b;
        let new_bk = Rational::from(&bnorm[k - 1] * &bnorm[k]) / &big_b;
        bnorm[k - 1] = big_b;
        bnorm[k] = new_bk;
        mu[k][k - 1] = new_mu.clone();
        for j in 0..k - 1 {
            let t = mu[k][j].clone();
            mu[k][j] = mu[k - 1][j].clone();
            mu[k - 1][j] = t;
        }
        for i in k + 1..n {
            let t = mu[i][k].clone();
            mu[i][k] = Rational::from(&mu[i][k - 1] - Rational::from(&m * &t));
            mu[i][k - 1] = Rational::from(&t + Rational::from(&new_mu * &mu[i][k]));
        }
        k = (k - 1).max(1);
    }
    b
}

/// Checks the size-reduction and Lovász conditions.
pub fn is_lll_reduced(b: &[Vec<Integer>], delta: &Rational) -> bool {
    let gs = gram_schmidt(b);
    let half = Rational::from((1, 2));
    for i in 0..b.len() {
        for j in 0..i {
            if Rational::from(gs.mu[i][j].abs_ref()) > half {
                return false;
            }
        }
        if i > 0 {
            let rhs = Rational::from(delta - Rational::from(gs.mu[i][i - 1].square_ref())) * &gs.bnorm[i - 1];
            if gs.bnorm[i] < rhs {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn reduces_small_lattice() {
        let b = vec![row(&[1, 1, 1]), row(&[-1, 0, 2]), row(&[3, 5, 6])];
        let r = lll_reduce(b, &default_delta());
        assert!(is_lll_reduced(&r, &default_delta()));
        let norms: Vec<Integer> = r.iter().map(|v| dot(v, v)).collect();
        assert!(norms[0] <= 3);
    }

    #[test]
    fn finds_golden_relation() {
        // φ² − φ − 1 = 0 with φ scaled by 2^40.
        let s = 1u64 << 40;
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let vals = [1.0, phi, phi * phi];
        let b: Vec<Vec<Integer>> = (0..3)
            .map(|i| {
                let mut r = vec![Integer::new(); 4];
                r[i] = Integer::from(1);
                r[3] = Integer::from_f64((vals[i] * s as f64).round()).unwrap();
                r
            })
            .collect();
        let r = lll_reduce(b, &default_delta());
        let first = &r[0];
        let rel: Vec<i64> = first[..3].iter().map(|x| x.to_i64().unwrap()).collect();
        assert!(rel == vec![1, 1, -1] || rel == vec![-1, -1, 1]);
    }

    #[test]
    fn rounding_is_nearest() {
        assert_eq!(round_rational(&Rational::from((7, 2))), 4);
        assert_eq!(round_rational(&Rational::from((-7, 3))), -2);
        assert_eq!(round_rational(&Rational::from((5, 3))), 2);
    }
}
