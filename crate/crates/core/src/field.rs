//! Arithmetic in the prime field F_p.
//!
//! [`FieldElement`] is the general-purpose type used by the one-off
//! operations (vertex predicate, Vieta moves, Penner map). The hot loops in
//! enumeration and graph analysis work on raw `u32` residues and use the
//! lookup tables built here ([`SqrtTable`], [`inverse_table`]).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("unsupported modulus p = {modulus}: {reason}")]
    UnsupportedModulus { modulus: u64, reason: &'static str },
}

/// A verified prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(n: u64) -> Result<Self, FieldError> {
        if is_prime(n) {
            Ok(Prime(n))
        } else {
            Err(FieldError::NotPrime(n))
        }
    }

    #[inline]
    pub const fn get(self) -> u64 {
        self.0
    }

    /// Reduces `n` into the field.
    #[inline]
    pub fn element(self, n: u64) -> FieldElement {
        FieldElement {
            residue: n % self.0,
            modulus: self,
        }
    }

    /// Reduces a signed integer into the field.
    pub fn element_i128(self, n: i128) -> FieldElement {
        let r = n.rem_euclid(self.0 as i128) as u64;
        FieldElement {
            residue: r,
            modulus: self,
        }
    }

    #[inline]
    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    #[inline]
    pub fn one(self) -> FieldElement {
        self.element(1)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<u64> for Prime {
    type Error = FieldError;

    fn try_from(n: u64) -> Result<Self, Self::Error> {
        Prime::new(n)
    }
}

/// All primes in `lo..=hi`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> impl Iterator<Item = Prime> {
    (lo..=hi).filter(|&n| is_prime(n)).map(Prime)
}

/// Canonical residue in `[0, p)` together with its modulus.
///
/// Binary operators panic when the moduli differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    residue: u64,
    modulus: Prime,
}

impl FieldElement {
    #[inline]
    pub fn residue(self) -> u64 {
        self.residue
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.modulus
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.residue == 0
    }

    #[inline]
    fn check_modulus(self, other: FieldElement) {
        assert_eq!(
            self.modulus, other.modulus,
            "field elements with different moduli"
        );
    }

    pub fn pow(self, mut exp: u64) -> FieldElement {
        let p = self.modulus.0;
        let mut base = self.residue;
        let mut acc = 1 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, p);
            }
            base = mul_mod(base, base, p);
            exp >>= 1;
        }
        FieldElement {
            residue: acc,
            modulus: self.modulus,
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.residue == 0 {
            return Err(FieldError::InverseOfZero);
        }
        let p = self.modulus.0 as i128;
        let (mut old_r, mut r) = (self.residue as i128, p);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(self.modulus.element_i128(old_s))
    }

    /// Legendre symbol: 0 for zero, +1 for a nonzero square, -1 otherwise.
    pub fn legendre(self) -> i8 {
        if self.residue == 0 {
            return 0;
        }
        let p = self.modulus.0;
        if p == 2 {
            return 1;
        }
        let e = self.pow((p - 1) / 2).residue;
        if e == 1 {
            1
        } else {
            debug_assert_eq!(e, p - 1);
            -1
        }
    }

    /// Both square roots `(r, p - r)` with `r <= p - r`, or `None` for a
    /// non-residue. Zero yields `(0, 0)`. Tonelli–Shanks; refuses `p = 2`.
    pub fn sqrt(self) -> Result<Option<(FieldElement, FieldElement)>, FieldError> {
        let prime = self.modulus;
        let p = prime.0;
        if p == 2 {
            return Err(FieldError::UnsupportedModulus {
                modulus: 2,
                reason: "square roots need an odd modulus",
            });
        }
        if self.residue == 0 {
            return Ok(Some((prime.zero(), prime.zero())));
        }
        if self.legendre() != 1 {
            return Ok(None);
        }

        let s = (p - 1).trailing_zeros();
        let q = (p - 1) >> s;
        let mut z = prime.element(2);
        while z.legendre() != -1 {
            z = z + prime.one();
        }

        let one = prime.one();
        let mut m = s;
        let mut c = z.pow(q);
        let mut t = self.pow(q);
        let mut r = self.pow(q.div_ceil(2));
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = t2 * t2;
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = b * b;
            }
            m = i;
            c = b * b;
            t = t * c;
            r = r * b;
        }

        let other = -r;
        if r.residue <= other.residue {
            Ok(Some((r, other)))
        } else {
            Ok(Some((other, r)))
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.residue.fmt(f)
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl Add for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.check_modulus(rhs);
        let p = self.modulus.0;
        let sum = (self.residue as u128 + rhs.residue as u128) % p as u128;
        FieldElement {
            residue: sum as u64,
            modulus: self.modulus,
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.check_modulus(rhs);
        let residue = if self.residue >= rhs.residue {
            self.residue - rhs.residue
        } else {
            self.modulus.0 - (rhs.residue - self.residue)
        };
        FieldElement {
            residue,
            modulus: self.modulus,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.check_modulus(rhs);
        FieldElement {
            residue: mul_mod(self.residue, rhs.residue, self.modulus.0),
            modulus: self.modulus,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn neg(self) -> FieldElement {
        let residue = if self.residue == 0 {
            0
        } else {
            self.modulus.0 - self.residue
        };
        FieldElement {
            residue,
            modulus: self.modulus,
        }
    }
}

/// Division-free reduction of 32-bit values modulo a fixed divisor
/// (Lemire's fastmod).
#[derive(Debug, Clone, Copy)]
pub struct FastMod {
    divisor: u64,
    magic: u64,
}

impl FastMod {
    pub fn new(divisor: u32) -> Self {
        assert!(divisor >= 2, "fastmod divisor must be at least 2");
        FastMod {
            divisor: divisor as u64,
            magic: u64::MAX / divisor as u64 + 1,
        }
    }

    /// `a mod divisor`; `a` must fit in 32 bits.
    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        debug_assert!(a <= u32::MAX as u64);
        let low = self.magic.wrapping_mul(a);
        ((low as u128 * self.divisor as u128) >> 64) as u64
    }
}

const NO_ROOT: u32 = u32::MAX;

/// Principal square root of every quadratic residue mod an odd prime.
///
/// The principal root is `min(r, p - r)`. Zero is included, so the table
/// has `(p - 1) / 2 + 1` entries.
#[derive(Debug, Clone)]
pub struct SqrtTable {
    modulus: Prime,
    roots: Vec<u32>,
}

impl SqrtTable {
    pub fn new(p: Prime) -> Result<Self, FieldError> {
        let n = p.get();
        if n == 2 {
            return Err(FieldError::UnsupportedModulus {
                modulus: 2,
                reason: "square-root table needs an odd modulus",
            });
        }
        if n >= u32::MAX as u64 {
            return Err(FieldError::UnsupportedModulus {
                modulus: n,
                reason: "square-root table is limited to 32-bit moduli",
            });
        }
        let mut roots = vec![NO_ROOT; n as usize];
        for r in 0..=(n - 1) / 2 {
            roots[(r * r % n) as usize] = r as u32;
        }
        Ok(SqrtTable { modulus: p, roots })
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    /// Principal root of `a` (taken mod p), if `a` is a square.
    #[inline]
    pub fn get(&self, a: u64) -> Option<u64> {
        let r = self.roots[(a % self.modulus.get()) as usize];
        (r != NO_ROOT).then_some(r as u64)
    }

    /// Like [`get`](Self::get) for an already reduced `a < p`.
    #[inline]
    pub fn get_reduced(&self, a: u64) -> Option<u64> {
        let r = self.roots[a as usize];
        (r != NO_ROOT).then_some(r as u64)
    }

    /// Number of residues with a root, zero included.
    pub fn len(&self) -> usize {
        self.roots.iter().filter(|&&r| r != NO_ROOT).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(residue, principal root)` pairs in ascending residue order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.roots
            .iter()
            .enumerate()
            .filter(|(_, &r)| r != NO_ROOT)
            .map(|(a, &r)| (a as u64, r as u64))
    }
}

/// `table[a] = a^-1 mod p` for `1 <= a < p`; `table[0] = 0`.
///
/// Built in O(p) with `inv(a) = -(p / a) * inv(p mod a)`.
pub fn inverse_table(p: Prime) -> Result<Vec<u32>, FieldError> {
    let n = p.get();
    if n >= u32::MAX as u64 {
        return Err(FieldError::UnsupportedModulus {
            modulus: n,
            reason: "inverse table is limited to 32-bit moduli",
        });
    }
    let mut inv = vec![0u32; n as usize];
    if n > 1 {
        inv[1] = 1;
    }
    for a in 2..n {
        let q = n / a;
        let prev = inv[(n % a) as usize] as u64;
        inv[a as usize] = ((n - q * prev % n) % n) as u32;
    }
    Ok(inv)
}

/// Deterministic Miller–Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    // The first twelve primes as witnesses cover all n < 3.3e24.
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fe(n: u64, p: u64) -> FieldElement {
        Prime::new(p).unwrap().element(n)
    }

    fn small_primes() -> impl Iterator<Item = Prime> {
        primes_between(2, 101)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(fe(3, 5).inv().unwrap().residue(), 2);
        assert_eq!(fe(2, 7).inv().unwrap().residue(), 4);
        for p in small_primes() {
            assert_eq!(p.one().inv().unwrap(), p.one());
        }
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        let err = fe(0, 11).inv().unwrap_err();
        assert_eq!(err, FieldError::InverseOfZero);
        assert_eq!(err.to_string(), "inverse of zero");
    }

    #[test]
    fn inverse_exhaustive() {
        for p in small_primes() {
            for a in 1..p.get() {
                let x = p.element(a);
                let inv = x.inv().unwrap();
                assert_eq!((x * inv).residue(), 1);
                assert_eq!(inv.inv().unwrap(), x);
            }
        }
    }

    #[test]
    fn inverse_table_matches_euclid() {
        for p in small_primes() {
            let table = inverse_table(p).unwrap();
            for a in 1..p.get() {
                assert_eq!(
                    table[a as usize] as u64,
                    p.element(a).inv().unwrap().residue()
                );
            }
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(fe(4, 7).legendre(), 1);
        assert_eq!(fe(3, 7).legendre(), -1);
        for p in small_primes() {
            assert_eq!(p.zero().legendre(), 0);
        }
    }

    #[test]
    fn legendre_agrees_with_enumerated_squares() {
        for p in small_primes() {
            let n = p.get();
            let squares: std::collections::HashSet<u64> = (1..n).map(|r| r * r % n).collect();
            for a in 1..n {
                let expected = if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(p.element(a).legendre(), expected, "a={a} p={n}");
            }
        }
    }

    #[test]
    fn legendre_is_multiplicative() {
        for p in small_primes() {
            for a in 1..p.get() {
                for b in 1..p.get() {
                    let (x, y) = (p.element(a), p.element(b));
                    assert_eq!((x * y).legendre(), x.legendre() * y.legendre());
                }
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        let (r, s) = fe(4, 7).sqrt().unwrap().unwrap();
        assert_eq!((r.residue(), s.residue()), (2, 5));
        assert_eq!(fe(3, 7).sqrt().unwrap(), None);
        for p in small_primes().filter(|p| p.get() > 2) {
            let (r, s) = p.zero().sqrt().unwrap().unwrap();
            assert_eq!((r.residue(), s.residue()), (0, 0));
        }
    }

    #[test]
    fn sqrt_refuses_two() {
        assert!(matches!(
            fe(1, 2).sqrt(),
            Err(FieldError::UnsupportedModulus { modulus: 2, .. })
        ));
        assert!(SqrtTable::new(Prime::new(2).unwrap()).is_err());
    }

    #[test]
    fn sqrt_large_two_adic_prime() {
        // p - 1 = 2^32 (2^32 - 1): deep 2-adic tower for the Tonelli–Shanks loop.
        let p = Prime::new(18446744069414584321).unwrap();
        for a in [2u64, 3, 5, 7, 1 << 40, 123456789] {
            let x = p.element(a);
            match x.sqrt().unwrap() {
                Some((r, s)) => {
                    assert_eq!(r * r, x);
                    assert_eq!(s, -r);
                }
                None => assert_eq!(x.legendre(), -1),
            }
        }
    }

    #[test]
    fn sqrt_table_examples() {
        let t5 = SqrtTable::new(Prime::new(5).unwrap()).unwrap();
        assert_eq!(t5.iter().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (4, 2)]);
        let t3 = SqrtTable::new(Prime::new(3).unwrap()).unwrap();
        assert_eq!(t3.iter().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        let t13 = SqrtTable::new(Prime::new(13).unwrap()).unwrap();
        assert_eq!(t13.len(), 7);
    }

    #[test]
    fn sqrt_table_agrees_with_tonelli_shanks() {
        for p in small_primes().filter(|p| p.get() > 2) {
            let table = SqrtTable::new(p).unwrap();
            assert_eq!(table.len() as u64, (p.get() - 1) / 2 + 1);
            for a in 0..p.get() {
                let ts = p.element(a).sqrt().unwrap().map(|(r, _)| r.residue());
                assert_eq!(table.get(a), ts, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(7));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(2));
        assert!(!is_prime(3489));
        assert!(is_prime(18446744073709551557)); // largest 64-bit prime
        assert!(!is_prime(3215031751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(!is_prime(3825123056546413051)); // spsp to bases 2..=23
    }

    #[test]
    fn primality_matches_trial_division() {
        fn trial(n: u64) -> bool {
            n >= 2
                && (2..)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        }
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial(n), "n={n}");
        }
    }

    #[test]
    fn prime_rejects_composites() {
        assert_eq!(Prime::new(3489), Err(FieldError::NotPrime(3489)));
        assert_eq!(Prime::try_from(13).unwrap().get(), 13);
    }

    #[test]
    fn fastmod_matches_remainder() {
        for d in [2u32, 3, 5, 7, 97, 2003, 6007, 65521, u32::MAX] {
            let fm = FastMod::new(d);
            let edge = [
                u32::MAX as u64,
                u32::MAX as u64 - 1,
                d as u64,
                2 * d as u64 - 1,
            ];
            for a in (0..200_000u64)
                .chain(edge)
                .filter(|&a| a <= u32::MAX as u64)
            {
                assert_eq!(fm.reduce(a), a % d as u64, "a={a} d={d}");
            }
        }
    }

    proptest! {
        #[test]
        fn fastmod_agrees(a in 0u64..=u32::MAX as u64, d in 2u32..) {
            prop_assert_eq!(FastMod::new(d).reduce(a), a % d as u64);
        }

        #[test]
        fn arithmetic_stays_canonical(a in any::<u64>(), b in any::<u64>(), pi in 0usize..4) {
            let p = Prime::new([101, 65521, 4294967291, 18446744073709551557][pi]).unwrap();
            let (x, y) = (p.element(a), p.element(b));
            for z in [x + y, x - y, x * y, -x] {
                prop_assert!(z.residue() < p.get());
            }
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!(x + y, y + x);
            prop_assert_eq!((x - y) + y, x);
            let c = p.element(a ^ b);
            prop_assert_eq!(x * (y + c), x * y + x * c);
            prop_assert_eq!((x * y) * c, x * (y * c));
        }

        #[test]
        fn inverse_round_trips(a in 1u64.., pi in 0usize..3) {
            let p = Prime::new([65521, 4294967291, 18446744073709551557][pi]).unwrap();
            let x = p.element(a);
            prop_assume!(!x.is_zero());
            prop_assert_eq!((x * x.inv().unwrap()).residue(), 1);
        }
    }
}
