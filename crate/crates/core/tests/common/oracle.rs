//! Reference values computed independently of the library.
//!
//! Arithmetic is fixed point on big integers with 60 decimal digits, π from
//! Machin's formula, ln 2 from the atanh series and sin from its Taylor
//! series. Nothing here calls into `tachyon_bound`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

const DIGITS: u32 = 60;

#[derive(Clone, Debug)]
pub struct Fx(BigInt);

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

impl Fx {
    pub fn int(v: i64) -> Self {
        Fx(BigInt::from(v) * scale())
    }

    /// Exact decimal literal such as "1.83e-7" or "813".
    pub fn dec(s: &str) -> Self {
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().expect("exponent")),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant),
        };
        let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
        let digits: BigInt = format!("{int_part}{frac_part}").parse().expect("digits");
        let shift = DIGITS as i32 + exp - frac_part.len() as i32;
        let v = if shift >= 0 {
            digits * BigInt::from(10u32).pow(shift as u32)
        } else {
            digits / BigInt::from(10u32).pow((-shift) as u32)
        };
        Fx(if neg { -v } else { v })
    }

    pub fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        Fx(&self.0 * &o.0 / scale())
    }

    pub fn div(&self, o: &Fx) -> Fx {
        Fx(&self.0 * scale() / &o.0)
    }

    pub fn sqrt(&self) -> Fx {
        assert!(!self.0.is_negative(), "sqrt of negative");
        Fx((&self.0 * scale()).sqrt())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        // Print with 25 significant digits and let the float parser round.
        let s = scale();
        let neg = self.0.is_negative();
        let a = self.0.abs();
        let int = &a / &s;
        let frac = &a % &s;
        let text = format!("{}{}.{:0>width$}", if neg { "-" } else { "" }, int, frac, width = DIGITS as usize);
        text.parse().expect("float")
    }
}

/// arctan(1/n) for integer n > 1.
fn arctan_inv(n: i64) -> Fx {
    let n_big = BigInt::from(n);
    let n2 = &n_big * &n_big;
    let mut power = scale() / &n_big;
    let mut sum = BigInt::zero();
    let mut k = 0i64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    Fx(sum)
}

pub fn pi() -> Fx {
    Fx(arctan_inv(5).0 * 16 - arctan_inv(239).0 * 4)
}

/// ln 2 = 2 atanh(1/3).
pub fn ln2() -> Fx {
    let mut power: BigInt = scale() / 3;
    let mut sum = BigInt::zero();
    let mut k = 0i64;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * k + 1);
        power /= 9;
        k += 1;
    }
    Fx(sum * 2)
}

pub fn sin(x: &Fx) -> Fx {
    let x2 = x.mul(x);
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut k = 1i64;
    loop {
        term = Fx(-(term.mul(&x2).0) / BigInt::from((2 * k) * (2 * k + 1)));
        if term.is_zero() {
            return sum;
        }
        sum = sum.add(&term);
        k += 1;
    }
}

pub fn radians(deg: &str) -> Fx {
    Fx::dec(deg).mul(&pi()).div(&Fx::int(180))
}

/// asin by bisection on `sin` over [0, π/2].
pub fn asin(y: &Fx) -> Fx {
    let mut lo = Fx::int(0);
    let mut hi = pi().div(&Fx::int(2));
    for _ in 0..200 {
        let mid = Fx((&lo.0 + &hi.0) / 2);
        if sin(&mid).0 < y.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// √(1 + (1−β²)(1−ρ²) / [ρ + ω β sinχ δt / 2]²), with decimal-string inputs
/// and χ in degrees.
pub fn bound(rho: &str, dt: &str, beta: &str, chi_deg: &str, omega: &str) -> f64 {
    let one = Fx::int(1);
    let (rho, dt, beta, omega) = (Fx::dec(rho), Fx::dec(dt), Fx::dec(beta), Fx::dec(omega));
    let s = sin(&radians(chi_deg));
    let denom = rho.add(&omega.mul(&beta).mul(&s).mul(&dt).div(&Fx::int(2)));
    let numer = one.sub(&beta.mul(&beta)).mul(&one.sub(&rho.mul(&rho)));
    one.add(&numer.div(&denom.mul(&denom))).sqrt().to_f64()
}

pub fn fast_limit(rho: &str, beta: &str) -> f64 {
    let beta = Fx::dec(beta);
    Fx::int(1).sub(&beta.mul(&beta)).sqrt().div(&Fx::dec(rho)).to_f64()
}

/// 2 ln2 λ² / (π Δλ), meters.
pub fn coherence_length(lambda: &str, dlambda: &str) -> f64 {
    let l = Fx::dec(lambda);
    Fx::int(2).mul(&ln2()).mul(&l).mul(&l).div(&pi().mul(&Fx::dec(dlambda))).to_f64()
}

pub fn quadrature(terms: &[&str]) -> f64 {
    terms
        .iter()
        .map(|t| {
            let v = Fx::dec(t);
            v.mul(&v)
        })
        .fold(Fx::int(0), |a, b| a.add(&b))
        .sqrt()
        .to_f64()
}

/// Baseline angle α (degrees) whose inaccessible sky fraction 1 − sinα equals `fraction`.
pub fn alpha_for_fraction_deg(fraction: &str) -> f64 {
    let y = Fx::int(1).sub(&Fx::dec(fraction));
    asin(&y).mul(&Fx::int(180)).div(&pi()).to_f64()
}

/// Whether a baseline at polar angle `alpha` ever becomes perpendicular to the
/// direction (theta, phi), decided by scanning a full turn for a sign change
/// of the projection. Plain f64; independent of the closed-form criterion.
pub fn brute_force_accessible(alpha: f64, theta: f64, phi: f64, steps: usize) -> bool {
    let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let proj = |psi: f64| alpha.sin() * psi.cos() * u[0] + alpha.sin() * psi.sin() * u[1] + alpha.cos() * u[2];
    let mut prev = proj(0.0);
    (1..=steps).any(|i| {
        let cur = proj(std::f64::consts::TAU * i as f64 / steps as f64);
        let crossed = prev == 0.0 || prev.signum() != cur.signum();
        prev = cur;
        crossed
    })
}

/// Frozen values (50+ significant digits in the big-integer evaluation,
/// rounded here to f64) used where a test wants a literal.
#[allow(clippy::excessive_precision)]
pub mod frozen {
    pub const RED_CMB: f64 = 4_850_406.124_471_342_767;
    pub const GREEN_CMB: f64 = 104_156.395_519_745_13;
    pub const BLUE_CMB: f64 = 32_532.464_340_617_511;
    pub const RED_WORST_BETA_1E2: f64 = 2_759_746.528_755_199_3;
    pub const FAST_LIMIT_CMB: f64 = 5_464_476.256_828_650_2;
    pub const THRESHOLD_RED: f64 = 0.005_020_576_131_687_242_8;
    pub const THRESHOLD_BLUE: f64 = 0.713_305_898_491_083_68;
    pub const COHERENCE_40NM: f64 = 7.291_664_599_864_898_6e-6;
    pub const COHERENCE_70NM: f64 = 4.166_665_485_637_084_9e-6;
    pub const QUADRATURE_215_7_3: f64 = 215.123_894_535_218_94;
    pub const ALPHA_5_PERCENT_DEG: f64 = 71.805_127_661_233_223;
    pub const EFFECTIVE_RHO_EGO: f64 = 1.830_839_249_732_786_6e-7;
}
