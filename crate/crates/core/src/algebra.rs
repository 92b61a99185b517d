//! Exact arithmetic in Z[λ_q] with λ_q = 2cos(π/q).
//!
//! Elements are integer coefficient vectors reduced modulo the minimal
//! polynomial of λ_q. Signs are decided exactly: a floating estimate is
//! trusted only when it clears a generous error bound, otherwise the value
//! is enclosed in a dyadic interval around λ_q that is refined on demand.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Ctx = Arc<NumberField>;

/// The field Q(λ_q) together with an isolating interval for λ_q.
pub struct NumberField {
    q: u32,
    minpoly: Vec<BigInt>,
    lambda_f64: f64,
    iso: Mutex<Isolation>,
}

#[derive(Clone)]
struct Isolation {
    // λ ∈ [lo / 2^bits, hi / 2^bits]
    lo: BigInt,
    hi: BigInt,
    bits: u32,
    exact: bool,
    sign_lo: i8,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumberField")
            .field("q", &self.q)
            .field("minpoly", &self.minpoly)
            .finish()
    }
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl Eq for NumberField {}

static CONTEXTS: OnceLock<Mutex<HashMap<u32, Ctx>>> = OnceLock::new();

/// Returns the shared context for `q`, building it on first use.
pub fn make_context(q: u32) -> Result<Ctx> {
    if q < 3 {
        return Err(Error::InvalidParameter(format!("q must be at least 3, got {q}")));
    }
    let map = CONTEXTS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("context cache poisoned");
    if let Some(ctx) = guard.get(&q) {
        return Ok(ctx.clone());
    }
    let ctx = Arc::new(NumberField::build(q));
    guard.insert(q, ctx.clone());
    Ok(ctx)
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division by a monic integer polynomial; panics if the remainder is nonzero.
fn poly_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![BigInt::zero()];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for k in (dd..rem.len()).rev() {
        let t = rem[k].clone();
        if t.is_zero() {
            continue;
        }
        quot[k - dd] = t.clone();
        for (i, c) in den.iter().enumerate() {
            rem[k - dd + i] -= &t * c;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact cyclotomic division");
    quot
}

/// Cyclotomic polynomial Φ_n, little-endian.
pub fn cyclotomic(n: u32) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    let mut den = vec![BigInt::one()];
    for d in 1..n {
        if n % d == 0 {
            den = poly_mul(&den, &cyclotomic(d));
        }
    }
    poly_div_monic(&num, &den)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Minimal polynomial of 2cos(π/q), obtained from Φ_{2q}(z) = z^D Ψ(z + 1/z).
pub fn lambda_minpoly(q: u32) -> Vec<BigInt> {
    let phi = cyclotomic(2 * q);
    let deg = (phi.len() - 1) / 2;
    let mut psi = vec![BigInt::zero(); deg + 1];
    psi[deg] = BigInt::one();
    for m in (0..deg).rev() {
        let mut acc = phi[deg + m].clone();
        let mut k = m + 2;
        while k <= deg {
            acc -= &psi[k] * binomial(k, (k - m) / 2);
            k += 2;
        }
        psi[m] = acc;
    }
    psi
}

fn bit_len(x: &BigInt) -> u64 {
    x.bits()
}

impl NumberField {
    fn build(q: u32) -> NumberField {
        let minpoly = lambda_minpoly(q);
        let lambda_f64 = 2.0 * (std::f64::consts::PI / q as f64).cos();
        let deg = minpoly.len() - 1;
        let iso = if deg == 1 {
            let root = -minpoly[0].clone();
            Isolation { lo: root.clone(), hi: root, bits: 0, exact: true, sign_lo: 0 }
        } else {
            let bits = 48u32;
            let center = BigInt::from((lambda_f64 * (1u64 << bits) as f64).round() as i64);
            let lo = &center - 8;
            let hi = &center + 8;
            let slo = sign_at_dyadic(&minpoly, &lo, bits);
            let shi = sign_at_dyadic(&minpoly, &hi, bits);
            assert!(slo != 0 && shi != 0 && slo != shi, "failed to isolate lambda_{q}");
            Isolation { lo, hi, bits, exact: false, sign_lo: slo }
        };
        NumberField { q, minpoly, lambda_f64, iso: Mutex::new(iso) }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Degree D of the minimal polynomial.
    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    /// Minimal polynomial, little-endian and monic.
    pub fn minpoly(&self) -> &[BigInt] {
        &self.minpoly
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda_f64
    }

    /// Current isolating interval as rationals (lo, hi).
    pub fn lambda_interval(&self) -> (BigRational, BigRational) {
        let iso = self.iso.lock().expect("isolation poisoned").clone();
        let den = BigInt::one() << iso.bits;
        (BigRational::new(iso.lo, den.clone()), BigRational::new(iso.hi, den))
    }

    fn isolation(&self, min_bits: u32) -> Isolation {
        let mut iso = self.iso.lock().expect("isolation poisoned");
        if !iso.exact {
            while iso.bits < min_bits {
                let mid = &iso.lo + &iso.hi;
                let bits = iso.bits + 1;
                let s = sign_at_dyadic(&self.minpoly, &mid, bits);
                if s == 0 {
                    iso.lo = mid.clone();
                    iso.hi = mid;
                    iso.bits = bits;
                    iso.exact = true;
                    break;
                }
                if s == iso.sign_lo {
                    iso.lo = mid;
                    iso.hi = &iso.hi << 1;
                } else {
                    iso.hi = mid;
                    iso.lo = &iso.lo << 1;
                }
                iso.bits = bits;
            }
        }
        iso.clone()
    }

    /// JSON form `{q, minpoly}`.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "q": self.q,
            "minpoly": self.minpoly.iter().map(bigint_to_json).collect::<Vec<_>>(),
        })
    }
}

/// Sign of Σ c_i (m/2^bits)^i.
fn sign_at_dyadic(poly: &[BigInt], m: &BigInt, bits: u32) -> i8 {
    let deg = poly.len() - 1;
    let mut acc = BigInt::zero();
    let mut mp = BigInt::one();
    for (i, c) in poly.iter().enumerate() {
        if !c.is_zero() {
            acc += (c * &mp) << (bits as usize * (deg - i));
        }
        mp *= m;
    }
    sign_of(&acc)
}

fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub(crate) fn bigint_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("not an integer: {n}"))),
        Value::String(s) => s.parse::<BigInt>().map_err(|_| Error::Parse(format!("not an integer: {s}"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

/// An element of Z[λ_q] in canonical form.
#[derive(Clone)]
pub struct AlgInt {
    ctx: Ctx,
    c: Vec<BigInt>,
}

impl PartialEq for AlgInt {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.q == other.ctx.q && self.c == other.c
    }
}

impl Eq for AlgInt {}

impl Hash for AlgInt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ctx.q.hash(state);
        self.c.hash(state);
    }
}

impl fmt::Debug for AlgInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Result of the pseudo-Euclidean gcd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GcdOutcome {
    /// The chain reached remainder zero; the value is |r_n|.
    Terminated(AlgInt),
    /// A remainder fell strictly between 0 and 1 in absolute value.
    BelowOne(AlgInt),
}

impl GcdOutcome {
    pub fn value(&self) -> &AlgInt {
        match self {
            GcdOutcome::Terminated(v) | GcdOutcome::BelowOne(v) => v,
        }
    }

    pub fn is_unit_gcd(&self) -> bool {
        matches!(self, GcdOutcome::Terminated(v) if v.is_one())
    }
}

fn check_ctx(x: &AlgInt, y: &AlgInt) -> Result<()> {
    if x.ctx.q == y.ctx.q {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

impl AlgInt {
    /// Reduces an arbitrary-length coefficient vector modulo the minimal polynomial.
    pub fn from_coeffs(ctx: &Ctx, coeffs: Vec<BigInt>) -> AlgInt {
        let deg = ctx.degree();
        let mut c = coeffs;
        let mp = &ctx.minpoly;
        if c.len() > deg {
            for k in (deg..c.len()).rev() {
                let t = std::mem::take(&mut c[k]);
                if t.is_zero() {
                    continue;
                }
                for i in 0..deg {
                    c[k - deg + i] -= &t * &mp[i];
                }
            }
        }
        c.resize(deg, BigInt::zero());
        AlgInt { ctx: ctx.clone(), c }
    }

    pub fn from_i64(ctx: &Ctx, v: i64) -> AlgInt {
        AlgInt::from_coeffs(ctx, vec![BigInt::from(v)])
    }

    pub fn from_bigint(ctx: &Ctx, v: BigInt) -> AlgInt {
        AlgInt::from_coeffs(ctx, vec![v])
    }

    pub fn zero(ctx: &Ctx) -> AlgInt {
        AlgInt::from_coeffs(ctx, Vec::new())
    }

    pub fn one(ctx: &Ctx) -> AlgInt {
        AlgInt::from_i64(ctx, 1)
    }

    /// λ_q itself.
    pub fn lambda(ctx: &Ctx) -> AlgInt {
        AlgInt::from_coeffs(ctx, vec![BigInt::zero(), BigInt::one()])
    }

    /// m·λ_q.
    pub fn lambda_multiple(ctx: &Ctx, m: &BigInt) -> AlgInt {
        AlgInt::from_coeffs(ctx, vec![BigInt::zero(), m.clone()])
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c.first().is_some_and(|x| x.is_one()) && self.c.iter().skip(1).all(|x| x.is_zero())
    }

    /// If the element is a rational integer, returns it.
    pub fn as_integer(&self) -> Option<&BigInt> {
        if self.c.iter().skip(1).all(|x| x.is_zero()) {
            self.c.first()
        } else {
            None
        }
    }

    /// If the element equals m·λ_q for an integer m, returns m.
    pub fn as_lambda_multiple(&self) -> Option<BigInt> {
        if self.ctx.degree() == 1 {
            return Some(self.c[0].clone());
        }
        if self.c[0].is_zero() && self.c.iter().skip(2).all(|x| x.is_zero()) {
            Some(self.c[1].clone())
        } else {
            None
        }
    }

    pub fn checked_add(&self, o: &AlgInt) -> Result<AlgInt> {
        check_ctx(self, o)?;
        Ok(self.add_unchecked(o))
    }

    pub fn checked_sub(&self, o: &AlgInt) -> Result<AlgInt> {
        check_ctx(self, o)?;
        Ok(self.sub_unchecked(o))
    }

    pub fn checked_mul(&self, o: &AlgInt) -> Result<AlgInt> {
        check_ctx(self, o)?;
        Ok(self.mul_unchecked(o))
    }

    fn add_unchecked(&self, o: &AlgInt) -> AlgInt {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect();
        AlgInt { ctx: self.ctx.clone(), c }
    }

    fn sub_unchecked(&self, o: &AlgInt) -> AlgInt {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect();
        AlgInt { ctx: self.ctx.clone(), c }
    }

    fn mul_unchecked(&self, o: &AlgInt) -> AlgInt {
        if self.ctx.degree() == 1 {
            return AlgInt { ctx: self.ctx.clone(), c: vec![&self.c[0] * &o.c[0]] };
        }
        AlgInt::from_coeffs(&self.ctx, poly_mul(&self.c, &o.c))
    }

    pub fn mul_int(&self, k: &BigInt) -> AlgInt {
        AlgInt { ctx: self.ctx.clone(), c: self.c.iter().map(|x| x * k).collect() }
    }

    pub fn pow(&self, mut e: u32) -> AlgInt {
        let mut base = self.clone();
        let mut acc = AlgInt::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Floating estimate of the value.
    pub fn to_f64(&self) -> f64 {
        let l = self.ctx.lambda_f64;
        let mut acc = 0.0;
        let mut p = 1.0;
        for c in &self.c {
            acc += c.to_f64().unwrap_or(f64::NAN) * p;
            p *= l;
        }
        acc
    }

    fn float_sign(&self) -> Option<i8> {
        let l = self.ctx.lambda_f64;
        let mut acc = 0.0f64;
        let mut mag = 0.0f64;
        let mut p = 1.0f64;
        for c in &self.c {
            let v = c.to_f64()?;
            if !v.is_finite() {
                return None;
            }
            acc += v * p;
            mag += v.abs() * p;
            p *= l;
        }
        if !acc.is_finite() || !mag.is_finite() {
            return None;
        }
        let bound = mag * 1e-9;
        if acc > bound {
            Some(1)
        } else if acc < -bound {
            Some(-1)
        } else {
            None
        }
    }

    /// Interval enclosure of the value at the given precision, as numerators
    /// over the common denominator 2^(bits·(D-1)).
    fn enclosure(&self, iso: &Isolation) -> (BigInt, BigInt) {
        let deg = self.ctx.degree();
        let shift = |i: usize| iso.bits as usize * (deg - 1 - i);
        let mut lower = BigInt::zero();
        let mut upper = BigInt::zero();
        let mut lp = BigInt::one();
        let mut hp = BigInt::one();
        for (i, c) in self.c.iter().enumerate() {
            if !c.is_zero() {
                let lo_term = (c * &lp) << shift(i);
                let hi_term = (c * &hp) << shift(i);
                if c.is_positive() {
                    lower += lo_term;
                    upper += hi_term;
                } else {
                    lower += hi_term;
                    upper += lo_term;
                }
            }
            lp *= &iso.lo;
            hp *= &iso.hi;
        }
        (lower, upper)
    }

    fn max_coeff_bits(&self) -> u32 {
        self.c.iter().map(bit_len).max().unwrap_or(0) as u32
    }

    /// Exact sign of the real number represented.
    pub fn sign(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.ctx.degree() == 1 {
            return sign_of(&self.c[0]);
        }
        if let Some(s) = self.float_sign() {
            return s;
        }
        let mut bits = 64 + self.max_coeff_bits();
        loop {
            let iso = self.ctx.isolation(bits);
            let (lo, hi) = self.enclosure(&iso);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            if iso.exact {
                return sign_of(&lo);
            }
            bits *= 2;
        }
    }

    pub fn abs(&self) -> AlgInt {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison of real values.
    pub fn cmp_value(&self, o: &AlgInt) -> std::cmp::Ordering {
        (self - o).sign().cmp(&0)
    }

    /// z with y·z = x, if it exists in Z[λ_q].
    pub fn exact_div(&self, y: &AlgInt) -> Result<AlgInt> {
        check_ctx(self, y)?;
        if y.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let deg = self.ctx.degree();
        if deg == 1 {
            let (qt, r) = self.c[0].div_rem(&y.c[0]);
            return if r.is_zero() {
                Ok(AlgInt::from_bigint(&self.ctx, qt))
            } else {
                Err(Error::NotDivisible)
            };
        }
        // Solve M_y z = x where column j of M_y is y·λ^j.
        let mut cols = Vec::with_capacity(deg);
        let mut cur = y.clone();
        let lam = AlgInt::lambda(&self.ctx);
        for _ in 0..deg {
            cols.push(cur.c.clone());
            cur = &cur * &lam;
        }
        let mut m: Vec<Vec<BigRational>> = (0..deg)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    (0..deg).map(|j| BigRational::from_integer(cols[j][i].clone())).collect();
                row.push(BigRational::from_integer(self.c[i].clone()));
                row
            })
            .collect();
        for col in 0..deg {
            let piv = (col..deg).find(|&r| !m[r][col].is_zero()).expect("multiplication matrix is singular");
            m.swap(col, piv);
            let p = m[col][col].clone();
            for k in col..=deg {
                m[col][k] = &m[col][k] / &p;
            }
            for r in 0..deg {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for k in col..=deg {
                        let t = &f * &m[col][k];
                        m[r][k] -= t;
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(deg);
        for row in m.iter() {
            let v = &row[deg];
            if !v.is_integer() {
                return Err(Error::NotDivisible);
            }
            out.push(v.to_integer());
        }
        Ok(AlgInt { ctx: self.ctx.clone(), c: out })
    }

    /// Parses text such as `4L-1`, `3*L^2 + L - 2` or `c0 + c1*L`.
    pub fn parse(ctx: &Ctx, text: &str) -> Result<AlgInt> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty algebraic integer".into()));
        }
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut first = true;
        while i < chars.len() {
            let mut neg = false;
            if chars[i] == '+' || chars[i] == '-' {
                neg = chars[i] == '-';
                i += 1;
            } else if !first {
                return Err(Error::Parse(format!("expected '+' or '-' in '{text}'")));
            }
            first = false;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut coef = if i > start {
                chars[start..i].iter().collect::<String>().parse::<BigInt>().expect("digits")
            } else {
                BigInt::one()
            };
            let had_digits = i > start;
            if i < chars.len() && chars[i] == '*' {
                i += 1;
                if i >= chars.len() || !is_lambda_char(chars[i]) {
                    return Err(Error::Parse(format!("expected L after '*' in '{text}'")));
                }
            }
            let mut exp = 0usize;
            if i < chars.len() && is_lambda_char(chars[i]) {
                i += 1;
                exp = 1;
                if i < chars.len() && chars[i] == '^' {
                    i += 1;
                    let es = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if es == i {
                        return Err(Error::Parse(format!("missing exponent in '{text}'")));
                    }
                    exp = chars[es..i].iter().collect::<String>().parse::<usize>().map_err(|_| Error::Parse("exponent".into()))?;
                }
            } else if !had_digits {
                return Err(Error::Parse(format!("unexpected character in '{text}'")));
            }
            if neg {
                coef = -coef;
            }
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, BigInt::zero());
            }
            coeffs[exp] += coef;
        }
        Ok(AlgInt::from_coeffs(ctx, coeffs))
    }

    /// Little-endian coefficient array.
    pub fn to_json(&self) -> Value {
        Value::Array(self.c.iter().map(bigint_to_json).collect())
    }

    pub fn from_json(ctx: &Ctx, v: &Value) -> Result<AlgInt> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("algebraic integer must be an array".into()))?;
        let coeffs = arr.iter().map(bigint_from_json).collect::<Result<Vec<_>>>()?;
        Ok(AlgInt::from_coeffs(ctx, coeffs))
    }
}

fn is_lambda_char(c: char) -> bool {
    c == 'L' || c == 'l' || c == 'λ'
}

impl fmt::Display for AlgInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            if i == 0 {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                }
                out.push('L');
                if i > 1 {
                    out.push_str(&format!("^{i}"));
                }
            }
        }
        f.write_str(&out)
    }
}

impl std::ops::Neg for &AlgInt {
    type Output = AlgInt;
    fn neg(self) -> AlgInt {
        AlgInt { ctx: self.ctx.clone(), c: self.c.iter().map(|x| -x).collect() }
    }
}

impl std::ops::Neg for AlgInt {
    type Output = AlgInt;
    fn neg(self) -> AlgInt {
        -&self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl std::ops::$tr<&AlgInt> for &AlgInt {
            type Output = AlgInt;
            /// Panics when the operands live in different number fields.
            fn $m(self, o: &AlgInt) -> AlgInt {
                assert_eq!(self.ctx.q, o.ctx.q, "mixed number-field contexts");
                self.$inner(o)
            }
        }
        impl std::ops::$tr<AlgInt> for AlgInt {
            type Output = AlgInt;
            fn $m(self, o: AlgInt) -> AlgInt {
                (&self).$m(&o)
            }
        }
        impl std::ops::$tr<&AlgInt> for AlgInt {
            type Output = AlgInt;
            fn $m(self, o: &AlgInt) -> AlgInt {
                (&self).$m(o)
            }
        }
    };
}

binop!(Add, add, add_unchecked);
binop!(Sub, sub, sub_unchecked);
binop!(Mul, mul, mul_unchecked);

fn floor_half_up(num: &BigInt, den: &BigInt) -> BigInt {
    // floor(num/den + 1/2) for den > 0
    let n: BigInt = num * 2 + den;
    let d: BigInt = den * 2;
    n.div_floor(&d)
}

/// One pseudo-Euclidean step: x = y·(mλ) + r with -|yλ|/2 < r ≤ |yλ|/2.
pub fn pea_step(x: &AlgInt, y: &AlgInt) -> Result<(BigInt, AlgInt)> {
    check_ctx(x, y)?;
    if y.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if x.is_zero() {
        return Ok((BigInt::zero(), x.clone()));
    }
    let ctx = x.ctx.clone();
    let yl = y * &AlgInt::lambda(&ctx);
    let yl_abs = if yl.sign() > 0 { yl.clone() } else { -&yl };
    let in_window = |m: &BigInt| -> Option<AlgInt> {
        let r = x - &yl.mul_int(m);
        let twice = r.mul_int(&BigInt::from(2));
        if (&twice + &yl_abs).sign() > 0 && (&yl_abs - &twice).sign() >= 0 {
            Some(r)
        } else {
            None
        }
    };
    let (xf, yf) = (x.to_f64(), yl.to_f64());
    if xf.is_finite() && yf.is_finite() && yf != 0.0 {
        let t = xf / yf;
        if t.is_finite() && t.abs() < 1e15 {
            let m0 = BigInt::from((t + 0.5).floor() as i64);
            for d in [0i64, -1, 1] {
                let m = &m0 + d;
                if let Some(r) = in_window(&m) {
                    return Ok((m, r));
                }
            }
        }
    }
    let mut bits = 64 + x.max_coeff_bits().max(yl.max_coeff_bits());
    loop {
        let iso = ctx.isolation(bits);
        let (xl, xu) = x.enclosure(&iso);
        let (yl_lo, yl_hi) = yl.enclosure(&iso);
        let exact = iso.exact;
        if yl_lo.is_positive() || yl_hi.is_negative() {
            let quots = [(&xl, &yl_lo), (&xl, &yl_hi), (&xu, &yl_lo), (&xu, &yl_hi)]
                .map(|(n, d)| if d.is_negative() { floor_half_up(&-n, &-d) } else { floor_half_up(n, d) });
            let lo = quots.iter().min().unwrap().clone() - 1;
            let hi = quots.iter().max().unwrap().clone();
            if &hi - &lo <= BigInt::from(4) || exact {
                let mut m = lo;
                while m <= hi {
                    if let Some(r) = in_window(&m) {
                        return Ok((m, r));
                    }
                    m += 1;
                }
            }
        }
        assert!(!exact, "pseudo-Euclidean window has no solution");
        bits *= 2;
    }
}

/// The pseudo-Euclidean gcd (a, b)_q with the below-one cutoff.
pub fn gcd_q(a: &AlgInt, b: &AlgInt) -> Result<GcdOutcome> {
    check_ctx(a, b)?;
    if a.is_zero() && b.is_zero() {
        return Err(Error::InvalidInput("gcd of (0, 0)".into()));
    }
    if b.is_zero() {
        return Ok(GcdOutcome::Terminated(a.abs()));
    }
    if a.is_zero() {
        return Ok(GcdOutcome::Terminated(b.abs()));
    }
    let one = AlgInt::one(&a.ctx);
    let (mut x, mut y) = (a.clone(), b.clone());
    loop {
        let (_, r) = pea_step(&x, &y)?;
        if r.is_zero() {
            return Ok(GcdOutcome::Terminated(y.abs()));
        }
        let ra = r.abs();
        if ra.cmp_value(&one) == std::cmp::Ordering::Less {
            return Ok(GcdOutcome::BelowOne(ra));
        }
        x = y;
        y = r;
    }
}

/// Runs the full chain without the cutoff, returning |r_n| or None past the budget.
pub(crate) fn full_chain_gcd(a: &AlgInt, b: &AlgInt, budget: usize) -> Result<Option<AlgInt>> {
    if b.is_zero() {
        return Ok(Some(a.abs()));
    }
    if a.is_zero() {
        return Ok(Some(b.abs()));
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    for _ in 0..budget {
        let (_, r) = pea_step(&x, &y)?;
        if r.is_zero() {
            return Ok(Some(y.abs()));
        }
        x = y;
        y = r;
    }
    Ok(None)
}
