//! Characteristic polynomials and exact root finding over ℚ(i).
//!
//! Roots are found by the rational-root theorem transplanted to the
//! Gaussian integers (a PID): clear denominators, strip powers of x, and
//! test every unit multiple of (divisor of the constant term)/(divisor of
//! the leading term). A polynomial that does not split this way has no
//! roots in ℚ(i) at all, and the rootless residual factor is reported.

use crate::matrix::ExactMatrix;
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeSet;

/// Coefficients of det(xI − A) in ascending power order, length n+1,
/// leading coefficient 1. Computed by the Faddeev–LeVerrier recurrence,
/// which stays in exact rational arithmetic.
pub fn char_poly(a: &ExactMatrix) -> Vec<Scalar> {
    assert!(a.is_square(), "char_poly requires a square matrix");
    let n = a.rows();
    // coeffs[k] multiplies x^k; fill descending as the recurrence yields them.
    let mut coeffs = vec![Scalar::zero(); n + 1];
    coeffs[n] = Scalar::one();
    let mut m = ExactMatrix::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let mut tr = Scalar::zero();
        for i in 0..n {
            tr = &tr + am.at(i, i);
        }
        let ck = &(-&tr) / &Scalar::from_int(k as i64);
        coeffs[n - k] = ck.clone();
        m = am.add(&ExactMatrix::identity(n).scale(&ck));
    }
    coeffs
}

/// Horner evaluation.
pub fn eval_poly(coeffs: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// All roots in ℚ(i) with multiplicities, sorted by the scalar total order.
/// `Err` carries the monic rootless residual factor (ascending coefficients)
/// when the polynomial does not split over ℚ(i).
pub fn roots_in_qi(coeffs: &[Scalar]) -> Result<Vec<(Scalar, usize)>, Vec<Scalar>> {
    let mut work: Vec<Scalar> = coeffs.to_vec();
    while work.len() > 1 && work.last().unwrap().is_zero() {
        work.pop();
    }
    let mut roots: Vec<(Scalar, usize)> = Vec::new();
    let add_root = |roots: &mut Vec<(Scalar, usize)>, r: Scalar| {
        if let Some(entry) = roots.iter_mut().find(|(v, _)| *v == r) {
            entry.1 += 1;
        } else {
            roots.push((r, 1));
        }
    };
    // Roots at zero: strip trailing zero coefficients at the low end.
    while work.len() > 1 && work[0].is_zero() {
        work.remove(0);
        add_root(&mut roots, Scalar::zero());
    }
    while work.len() > 1 {
        let Some(root) = find_one_root(&work) else {
            // Rootless residual: normalize monic for reporting.
            let lead = work.last().unwrap().clone();
            let monic: Vec<Scalar> = work.iter().map(|c| c / &lead).collect();
            return Err(monic);
        };
        work = deflate(&work, &root);
        add_root(&mut roots, root);
        while work.len() > 1 && work[0].is_zero() {
            work.remove(0);
            add_root(&mut roots, Scalar::zero());
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(roots)
}

/// Synthetic division by (x − r); the remainder is asserted to vanish.
fn deflate(coeffs: &[Scalar], r: &Scalar) -> Vec<Scalar> {
    let n = coeffs.len() - 1;
    let mut out = vec![Scalar::zero(); n];
    let mut carry = Scalar::zero();
    for k in (0..n).rev() {
        carry = &coeffs[k + 1] + &(&carry * r);
        out[k] = carry.clone();
    }
    let rem = &coeffs[0] + &(&carry * r);
    assert!(rem.is_zero(), "deflation by a non-root");
    out
}

/// Gaussian integer as a coefficient pair.
#[derive(Clone, PartialEq, Eq)]
struct GInt {
    re: BigInt,
    im: BigInt,
}

impl GInt {
    fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    fn mul(&self, rhs: &GInt) -> GInt {
        GInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    /// Exact quotient self/rhs when rhs divides self in ℤ[i].
    fn div_exact(&self, rhs: &GInt) -> Option<GInt> {
        let n = rhs.norm();
        if n.is_zero() {
            return None;
        }
        // self · conj(rhs) must have both parts divisible by N(rhs).
        let num = self.mul(&GInt {
            re: rhs.re.clone(),
            im: -rhs.im.clone(),
        });
        let (qr, rr) = num.re.div_rem(&n);
        let (qi, ri) = num.im.div_rem(&n);
        if rr.is_zero() && ri.is_zero() {
            Some(GInt { re: qr, im: qi })
        } else {
            None
        }
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::new(
            BigRational::from_integer(self.re.clone()),
            BigRational::from_integer(self.im.clone()),
        )
    }
}

/// Gaussian prime factors of `g` (nonzero), with multiplicity, up to units.
fn gaussian_prime_factors(g: &GInt) -> Vec<(GInt, usize)> {
    let mut factors: Vec<(GInt, usize)> = Vec::new();
    let mut rest = g.clone();
    let mut push = |rest: &mut GInt, pi: GInt| {
        let mut count = 0;
        while let Some(q) = rest.div_exact(&pi) {
            *rest = q;
            count += 1;
        }
        if count > 0 {
            factors.push((pi, count));
        }
    };
    let mut norm = g.norm();
    let mut p = BigInt::from(2);
    while &p * &p <= norm {
        if norm.is_multiple_of(&p) {
            while norm.is_multiple_of(&p) {
                norm /= &p;
            }
            for pi in gaussian_primes_over(&p) {
                push(&mut rest, pi);
            }
        }
        p += 1;
    }
    if norm > BigInt::one() {
        for pi in gaussian_primes_over(&norm) {
            push(&mut rest, pi);
        }
    }
    factors
}

/// The Gaussian primes lying over the rational prime p.
fn gaussian_primes_over(p: &BigInt) -> Vec<GInt> {
    if *p == BigInt::from(2) {
        return vec![GInt {
            re: BigInt::one(),
            im: BigInt::one(),
        }];
    }
    if (p % BigInt::from(4)) == BigInt::from(3) {
        // Inert: p itself is a Gaussian prime.
        return vec![GInt {
            re: p.clone(),
            im: BigInt::zero(),
        }];
    }
    // Split: p ≡ 1 (mod 4) is a sum of two squares, found by search.
    let mut a = BigInt::one();
    loop {
        let rem = p - &a * &a;
        if rem <= BigInt::zero() {
            unreachable!("every prime ≡ 1 mod 4 is a sum of two squares");
        }
        let b = rem.sqrt();
        if &b * &b == rem {
            let pi = GInt { re: a, im: b.clone() };
            let conj = GInt {
                re: pi.re.clone(),
                im: -b,
            };
            return vec![pi, conj];
        }
        a += 1;
    }
}

/// All divisors of `g` up to units.
fn gaussian_divisors(g: &GInt) -> Vec<GInt> {
    let mut divs = vec![GInt {
        re: BigInt::one(),
        im: BigInt::zero(),
    }];
    for (pi, count) in gaussian_prime_factors(g) {
        let base = divs.clone();
        let mut power = GInt {
            re: BigInt::one(),
            im: BigInt::zero(),
        };
        for _ in 0..count {
            power = power.mul(&pi);
            for d in &base {
                divs.push(d.mul(&power));
            }
        }
    }
    divs
}

/// One root in ℚ(i) of a nonzero-constant-term polynomial, if any.
fn find_one_root(coeffs: &[Scalar]) -> Option<Scalar> {
    // Clear denominators to get a ℤ[i] polynomial.
    let mut denlcm = BigInt::one();
    for c in coeffs {
        denlcm = denlcm.lcm(c.re.denom());
        denlcm = denlcm.lcm(c.im.denom());
    }
    let scale = BigRational::from_integer(denlcm);
    let zi: Vec<GInt> = coeffs
        .iter()
        .map(|c| GInt {
            re: (&c.re * &scale).to_integer(),
            im: (&c.im * &scale).to_integer(),
        })
        .collect();
    let a0 = zi.first().unwrap();
    let an = zi.last().unwrap();
    assert!(!a0.norm().is_zero() && !an.norm().is_zero());

    let units = [
        Scalar::one(),
        -Scalar::one(),
        Scalar::i(),
        -Scalar::i(),
    ];
    let mut candidates: BTreeSet<Scalar> = BTreeSet::new();
    for p in gaussian_divisors(a0) {
        for q in gaussian_divisors(an) {
            let ratio = &p.to_scalar() / &q.to_scalar();
            for u in &units {
                candidates.insert(u * &ratio);
            }
        }
    }
    candidates
        .into_iter()
        .find(|r| eval_poly(coeffs, r).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat;
    use crate::scalar::parse_scalar;

    fn sc(t: &str) -> Scalar {
        parse_scalar(t).unwrap()
    }

    #[test]
    fn char_poly_examples() {
        // Nilpotent: x².
        assert_eq!(
            char_poly(&mat![[0, 1], [0, 0]]),
            vec![sc("0"), sc("0"), sc("1")]
        );
        // x − 3.
        assert_eq!(char_poly(&mat![[3]]), vec![sc("-3"), sc("1")]);
        // x² − 3x + 2.
        assert_eq!(
            char_poly(&mat![[1, 0], [0, 2]]),
            vec![sc("2"), sc("-3"), sc("1")]
        );
    }

    #[test]
    fn roots_with_multiplicity_sorted() {
        // (x−5)² from J₂(5).
        let p = char_poly(&mat![[5, 1], [0, 5]]);
        assert_eq!(roots_in_qi(&p).unwrap(), vec![(sc("5"), 2)]);
        // x² + 1 from a rotation: roots ±i sorted with −i first.
        let p = char_poly(&mat![[0, -1], [1, 0]]);
        assert_eq!(
            roots_in_qi(&p).unwrap(),
            vec![(sc("-i"), 1), (sc("i"), 1)]
        );
    }

    #[test]
    fn nonsplit_reports_residual() {
        // x² − 2 has no Gaussian-rational roots.
        let p = char_poly(&mat![[0, 1], [2, 0]]);
        assert_eq!(
            roots_in_qi(&p).unwrap_err(),
            vec![sc("-2"), sc("0"), sc("1")]
        );
    }

    #[test]
    fn rational_and_gaussian_roots() {
        // (x − 1/2)(x − (3+i)) = x² − (7/2+i)x + (3/2+1/2i)
        let p = vec![
            &sc("1/2") * &sc("3+i"),
            -&(&sc("1/2") + &sc("3+i")),
            sc("1"),
        ];
        assert_eq!(
            roots_in_qi(&p).unwrap(),
            vec![(sc("1/2"), 1), (sc("3+i"), 1)]
        );
    }

    #[test]
    fn zero_roots_stripped() {
        // x³ − x² = x²(x − 1).
        let p = vec![sc("0"), sc("0"), sc("-1"), sc("1")];
        assert_eq!(roots_in_qi(&p).unwrap(), vec![(sc("0"), 2), (sc("1"), 1)]);
    }

    #[test]
    fn cayley_hamilton_small() {
        let a = mat![[1, 2, 0], [0, 1, -1], [3, 0, 2]];
        let p = char_poly(&a);
        let n = a.rows();
        let mut acc = ExactMatrix::zeros(n, n);
        let mut power = ExactMatrix::identity(n);
        for c in &p {
            acc = acc.add(&power.scale(c));
            power = power.mul(&a);
        }
        assert!(acc.is_zero());
    }
}
