//! Arithmetic in `F_p`, the quadratic character and the additive character
//! `psi(k) = exp(2 pi i k / p)`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd prime `p >= 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    /// Largest modulus accepted. Keeps `p^2` products inside `u64`
    /// and table sizes at desk scale.
    pub const MAX: u64 = 1 << 20;

    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p < 5 {
            return Err(Error::ModulusTooSmall(p));
        }
        if p > Self::MAX {
            return Err(Error::domain(format!("modulus {p} exceeds {}", Self::MAX)));
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn residue(self, value: i64) -> Residue {
        Residue {
            value: value.rem_euclid(self.0 as i64) as u64,
            modulus: self,
        }
    }

    #[inline]
    pub(crate) fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.0
    }

    #[inline]
    pub(crate) fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.0
    }

    #[inline]
    pub(crate) fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.0 - b) % self.0
    }

    #[inline]
    pub(crate) fn neg(self, a: u64) -> u64 {
        (self.0 - a) % self.0
    }

    pub(crate) fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.0;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub(crate) fn inv(self, a: u64) -> Result<u64> {
        let a = a % self.0;
        if a == 0 {
            return Err(Error::ZeroInverse(self.0));
        }
        Ok(self.pow(a, self.0 - 2))
    }

    /// Quadratic character: `a^((p-1)/2)` mapped to `{-1, 0, 1}`.
    pub(crate) fn legendre(self, a: u64) -> i8 {
        let a = a % self.0;
        if a == 0 {
            return 0;
        }
        if self.pow(a, (self.0 - 1) / 2) == 1 {
            1
        } else {
            -1
        }
    }

    /// Smallest generator of `F_p^*`.
    pub fn primitive_root(self) -> u64 {
        let order = self.0 - 1;
        let factors = prime_factors(order);
        (2..self.0)
            .find(|&g| factors.iter().all(|&q| self.pow(g, order / q) != 1))
            .expect("F_p^* is cyclic")
    }

    /// Smallest quadratic non-residue.
    pub fn smallest_nonresidue(self) -> u64 {
        (2..self.0)
            .find(|&a| self.legendre(a) == -1)
            .expect("odd p has non-residues")
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PrimeModulus::new(p)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(p: PrimeModulus) -> u64 {
        p.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Trial division up to `sqrt(n)`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element of `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: PrimeModulus,
}

impl Residue {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Residue> {
        Ok(Residue {
            value: self.modulus.inv(self.value)?,
            modulus: self.modulus,
        })
    }

    pub fn pow(self, exp: u64) -> Residue {
        Residue {
            value: self.modulus.pow(self.value, exp),
            modulus: self.modulus,
        }
    }

    pub fn legendre(self) -> i8 {
        self.modulus.legendre(self.value)
    }

    #[inline]
    fn check(self, other: Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "residues from different fields"
        );
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl Add for Residue {
    type Output = Residue;

    fn add(self, rhs: Residue) -> Residue {
        self.check(rhs);
        Residue {
            value: self.modulus.add(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;

    fn sub(self, rhs: Residue) -> Residue {
        self.check(rhs);
        Residue {
            value: self.modulus.sub(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;

    fn mul(self, rhs: Residue) -> Residue {
        self.check(rhs);
        Residue {
            value: self.modulus.mul(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;

    fn neg(self) -> Residue {
        Residue {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

/// Precomputed character tables for one prime. Cheap to clone.
#[derive(Debug, Clone)]
pub struct FiniteField {
    inner: Arc<Tables>,
}

#[derive(Debug)]
struct Tables {
    modulus: PrimeModulus,
    characters: Vec<Complex64>,
    legendre: Vec<i8>,
}

impl FiniteField {
    pub fn new(modulus: PrimeModulus) -> Self {
        let p = modulus.size();
        let step = TAU / p as f64;
        let mut characters = vec![Complex64::new(1.0, 0.0); p];
        for (k, z) in characters.iter_mut().enumerate().take(p / 2 + 1).skip(1) {
            let angle = step * k as f64;
            *z = Complex64::new(angle.cos(), angle.sin());
        }
        // p is odd, so every k > p/2 pairs with p - k <= p/2.
        for k in p / 2 + 1..p {
            characters[k] = characters[p - k].conj();
        }
        let legendre = (0..p as u64).map(|a| modulus.legendre(a)).collect();
        FiniteField {
            inner: Arc::new(Tables {
                modulus,
                characters,
                legendre,
            }),
        }
    }

    pub fn with_prime(p: u64) -> Result<Self> {
        Ok(Self::new(PrimeModulus::new(p)?))
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.inner.modulus
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.inner.modulus.size()
    }

    /// `psi(k) = exp(2 pi i k / p)`; `k` is reduced mod `p`.
    #[inline]
    pub fn psi(&self, k: u64) -> Complex64 {
        self.inner.characters[(k % self.inner.modulus.get()) as usize]
    }

    pub fn additive_character(&self, k: Residue) -> Complex64 {
        self.psi(k.value())
    }

    pub fn character_table(&self) -> &[Complex64] {
        &self.inner.characters
    }

    #[inline]
    pub fn legendre(&self, a: u64) -> i8 {
        self.inner.legendre[(a % self.inner.modulus.get()) as usize]
    }

    /// `sum_t psi(a t^2 + b t)`.
    pub fn quadratic_gauss_sum(&self, a: u64, b: u64) -> Complex64 {
        let m = self.modulus();
        (0..m.get())
            .map(|t| self.psi(m.add(m.mul(a, m.mul(t, t)), m.mul(b, t))))
            .sum()
    }

    /// `p^(-1/2) sum_t psi(t^2)`: `1` for `p = 1 mod 4`, `i` for `p = 3 mod 4`,
    /// up to rounding.
    pub fn weil_normalizer(&self) -> Complex64 {
        self.quadratic_gauss_sum(1, 0) / (self.p() as f64).sqrt()
    }
}
