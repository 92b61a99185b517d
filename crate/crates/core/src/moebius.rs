//! Projective matrices over Z[λ_q], cusps in reduced form, membership in G_q
//! and word decomposition.
//!
//! Matrices use the layout `[[a, c], [b, d]]`, so `(a, b)` is the first column.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::Value;

use crate::algebra::{full_chain_gcd, gcd_q, pea_step, AlgInt, Ctx, GcdOutcome};
use crate::error::{Error, Result};

/// An element of PSL(2, Z[λ_q]); `M` and `-M` compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix2 {
    a: AlgInt,
    b: AlgInt,
    c: AlgInt,
    d: AlgInt,
}

impl fmt::Debug for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.c, self.b, self.d)
    }
}

impl Matrix2 {
    /// Builds `[[a, c], [b, d]]`, requiring determinant 1.
    pub fn new(a: AlgInt, b: AlgInt, c: AlgInt, d: AlgInt) -> Result<Matrix2> {
        let det = a.checked_mul(&d)?.checked_sub(&c.checked_mul(&b)?)?;
        if !det.is_one() {
            return Err(Error::InvalidInput(format!("determinant is {det}, expected 1")));
        }
        Ok(Matrix2::raw(a, b, c, d))
    }

    pub(crate) fn raw(a: AlgInt, b: AlgInt, c: AlgInt, d: AlgInt) -> Matrix2 {
        let lead = [&a, &b, &c, &d].iter().map(|x| x.sign()).find(|&s| s != 0).unwrap_or(1);
        if lead < 0 {
            Matrix2 { a: -a, b: -b, c: -c, d: -d }
        } else {
            Matrix2 { a, b, c, d }
        }
    }

    fn from_ints(ctx: &Ctx, a: i64, b: i64, c: i64, d: i64) -> Matrix2 {
        Matrix2::raw(
            AlgInt::from_i64(ctx, a),
            AlgInt::from_i64(ctx, b),
            AlgInt::from_i64(ctx, c),
            AlgInt::from_i64(ctx, d),
        )
    }

    pub fn identity(ctx: &Ctx) -> Matrix2 {
        Matrix2::from_ints(ctx, 1, 0, 0, 1)
    }

    /// S = [[0,1],[-1,0]].
    pub fn s(ctx: &Ctx) -> Matrix2 {
        Matrix2::from_ints(ctx, 0, -1, 1, 0)
    }

    /// T = [[1,λ],[0,1]].
    pub fn t(ctx: &Ctx) -> Matrix2 {
        Matrix2::raw(AlgInt::one(ctx), AlgInt::zero(ctx), AlgInt::lambda(ctx), AlgInt::one(ctx))
    }

    /// R = S·T⁻¹ = [[0,1],[-1,λ]].
    pub fn r(ctx: &Ctx) -> Matrix2 {
        Matrix2::raw(AlgInt::zero(ctx), AlgInt::from_i64(ctx, -1), AlgInt::one(ctx), AlgInt::lambda(ctx))
    }

    /// A = T⁻¹·S.
    pub fn a_gen(ctx: &Ctx) -> Matrix2 {
        &Matrix2::t(ctx).inverse() * &Matrix2::s(ctx)
    }

    /// U = [[1,0],[λ,1]], equal to R·S.
    pub fn u(ctx: &Ctx) -> Matrix2 {
        Matrix2::raw(AlgInt::one(ctx), AlgInt::lambda(ctx), AlgInt::zero(ctx), AlgInt::one(ctx))
    }

    /// The 2×2 matrix with columns `(a, b)` and `(c, d)`.
    pub fn from_columns(first: (&AlgInt, &AlgInt), second: (&AlgInt, &AlgInt)) -> Result<Matrix2> {
        Matrix2::new(first.0.clone(), first.1.clone(), second.0.clone(), second.1.clone())
    }

    pub fn ctx(&self) -> &Ctx {
        self.a.ctx()
    }

    /// Entries in the order (a, b, c, d).
    pub fn entries(&self) -> [&AlgInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn a(&self) -> &AlgInt {
        &self.a
    }
    pub fn b(&self) -> &AlgInt {
        &self.b
    }
    pub fn c(&self) -> &AlgInt {
        &self.c
    }
    pub fn d(&self) -> &AlgInt {
        &self.d
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn inverse(&self) -> Matrix2 {
        Matrix2::raw(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn checked_mul(&self, o: &Matrix2) -> Result<Matrix2> {
        if self.ctx().q() != o.ctx().q() {
            return Err(Error::ContextMismatch);
        }
        Ok(self * o)
    }

    pub fn pow(&self, k: i64) -> Matrix2 {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Matrix2::identity(self.ctx());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        acc
    }

    /// Conjugate `self · x · self⁻¹`.
    pub fn conj(&self, x: &Matrix2) -> Matrix2 {
        &(self * x) * &self.inverse()
    }

    /// Projective order, if at most `limit`.
    pub fn order(&self, limit: u32) -> Option<u32> {
        let mut p = self.clone();
        for k in 1..=limit {
            if p.is_identity() {
                return Some(k);
            }
            p = &p * self;
        }
        None
    }

    /// Parses `[[a,c],[b,d]]` given row by row.
    pub fn parse(ctx: &Ctx, text: &str) -> Result<Matrix2> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = s
            .strip_prefix("[[")
            .and_then(|t| t.strip_suffix("]]"))
            .ok_or_else(|| Error::Parse(format!("matrix must look like [[a,c],[b,d]]: '{text}'")))?;
        let rows: Vec<&str> = inner.split("],[").collect();
        if rows.len() != 2 {
            return Err(Error::Parse(format!("matrix must have two rows: '{text}'")));
        }
        let mut e = Vec::new();
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != 2 {
                return Err(Error::Parse(format!("matrix rows must have two entries: '{text}'")));
            }
            for c in cells {
                e.push(AlgInt::parse(ctx, c)?);
            }
        }
        let d = e.pop().unwrap();
        let b = e.pop().unwrap();
        let c = e.pop().unwrap();
        let a = e.pop().unwrap();
        Matrix2::new(a, b, c, d).map_err(|err| match err {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{m} in '{text}'")),
            other => other,
        })
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "c": self.c.to_json(),
            "d": self.d.to_json(),
        })
    }

    pub fn from_json(ctx: &Ctx, v: &Value) -> Result<Matrix2> {
        let get = |k: &str| -> Result<AlgInt> {
            let x = v.get(k).ok_or_else(|| Error::Parse(format!("matrix JSON is missing '{k}'")))?;
            AlgInt::from_json(ctx, x)
        };
        Matrix2::new(get("a")?, get("b")?, get("c")?, get("d")?)
    }
}

impl std::ops::Mul<&Matrix2> for &Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: &Matrix2) -> Matrix2 {
        let a = &self.a * &o.a + &self.c * &o.b;
        let b = &self.b * &o.a + &self.d * &o.b;
        let c = &self.a * &o.c + &self.c * &o.d;
        let d = &self.b * &o.c + &self.d * &o.d;
        Matrix2::raw(a, b, c, d)
    }
}

impl std::ops::Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        &self * &o
    }
}

/// A point of the extended real line as a fraction `num/den` with `den ≥ 0`.
///
/// `1/0` is +∞ and `-1/0` is -∞; the two are distinct sequence endpoints but
/// the same point of the boundary.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cusp {
    num: AlgInt,
    den: AlgInt,
}

impl fmt::Debug for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn is_single_term(x: &AlgInt) -> bool {
    x.coeffs().iter().filter(|c| !c.is_zero()).count() <= 1
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_zero() {
            return f.write_str(if self.num.sign() < 0 { "-inf" } else { "inf" });
        }
        let wrap = |x: &AlgInt| if is_single_term(x) { x.to_string() } else { format!("({x})") };
        write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl Cusp {
    /// Builds `num/den`, flipping signs so that `den ≥ 0`. Reducedness is not checked.
    pub fn new(num: AlgInt, den: AlgInt) -> Result<Cusp> {
        if num.is_zero() && den.is_zero() {
            return Err(Error::InvalidInput("cusp 0/0".into()));
        }
        if num.ctx().q() != den.ctx().q() {
            return Err(Error::ContextMismatch);
        }
        if den.sign() < 0 {
            Ok(Cusp { num: -num, den: -den })
        } else {
            Ok(Cusp { num, den })
        }
    }

    pub fn infinity(ctx: &Ctx) -> Cusp {
        Cusp { num: AlgInt::one(ctx), den: AlgInt::zero(ctx) }
    }

    pub fn neg_infinity(ctx: &Ctx) -> Cusp {
        Cusp { num: AlgInt::from_i64(ctx, -1), den: AlgInt::zero(ctx) }
    }

    pub fn zero(ctx: &Ctx) -> Cusp {
        Cusp { num: AlgInt::zero(ctx), den: AlgInt::one(ctx) }
    }

    pub fn ctx(&self) -> &Ctx {
        self.num.ctx()
    }

    pub fn num(&self) -> &AlgInt {
        &self.num
    }

    pub fn den(&self) -> &AlgInt {
        &self.den
    }

    pub fn is_infinite(&self) -> bool {
        self.den.is_zero()
    }

    pub fn is_pos_infinity(&self) -> bool {
        self.den.is_zero() && self.num.sign() > 0
    }

    pub fn is_neg_infinity(&self) -> bool {
        self.den.is_zero() && self.num.sign() < 0
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The cusp `-x`.
    pub fn neg(&self) -> Cusp {
        Cusp { num: -&self.num, den: self.den.clone() }
    }

    /// True when `(num, den)` is the first column of some element of G_q.
    pub fn is_reduced(&self) -> bool {
        matches!(gcd_q(&self.num, &self.den), Ok(g) if g.is_unit_gcd())
    }

    /// Identifies -∞ with +∞; every other cusp is returned unchanged.
    pub fn point(&self) -> Cusp {
        if self.is_neg_infinity() {
            Cusp::infinity(self.ctx())
        } else {
            self.clone()
        }
    }

    /// Exact order on the extended real line with -∞ < x < +∞.
    pub fn compare(&self, o: &Cusp) -> Ordering {
        let rank = |c: &Cusp| {
            if c.is_neg_infinity() {
                0
            } else if c.is_pos_infinity() {
                2
            } else {
                1
            }
        };
        let (ra, rb) = (rank(self), rank(o));
        if ra != 1 || rb != 1 {
            return ra.cmp(&rb);
        }
        (&self.num * &o.den).cmp_value(&(&o.num * &self.den))
    }

    /// `a_{self} b_{o} - ...`: the determinant `o.num·self.den - self.num·o.den`.
    pub fn det_with(&self, o: &Cusp) -> AlgInt {
        &o.num * &self.den - &self.num * &o.den
    }

    /// Parses `a/b`, `a`, `inf`, `-inf` or `∞`, with optional parentheses around `a` and `b`.
    pub fn parse(ctx: &Ctx, text: &str) -> Result<Cusp> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "inf" | "+inf" | "∞" | "+∞" => return Ok(Cusp::infinity(ctx)),
            "-inf" | "-∞" => return Ok(Cusp::neg_infinity(ctx)),
            _ => {}
        }
        let strip = |t: &str| -> String {
            t.strip_prefix('(').and_then(|u| u.strip_suffix(')')).unwrap_or(t).to_string()
        };
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (strip(n), strip(d)),
            None => (strip(&s), "1".to_string()),
        };
        let num = AlgInt::parse(ctx, &n)?;
        let den = AlgInt::parse(ctx, &d)?;
        if den.is_zero() {
            if num.is_one() {
                return Ok(Cusp::infinity(ctx));
            }
            if (-&num).is_one() {
                return Ok(Cusp::neg_infinity(ctx));
            }
            return Err(Error::InvalidInput(format!("cusp '{text}' has zero denominator")));
        }
        Cusp::new(num, den)
    }

    /// JSON form `[num, den]` with each entry a coefficient array.
    pub fn to_json(&self) -> Value {
        Value::Array(vec![self.num.to_json(), self.den.to_json()])
    }

    pub fn from_json(ctx: &Ctx, v: &Value) -> Result<Cusp> {
        let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse("cusp must be [num, den]".into()))?;
        Cusp::new(AlgInt::from_json(ctx, &arr[0])?, AlgInt::from_json(ctx, &arr[1])?)
    }
}

/// Projective action of `m` on a cusp. Points at infinity come back as +∞.
pub fn act(m: &Matrix2, x: &Cusp) -> Cusp {
    let n = m.a() * x.num() + m.c() * x.den();
    let d = m.b() * x.num() + m.d() * x.den();
    let c = Cusp::new(n, d).expect("invertible matrix maps a cusp to a cusp");
    if c.den.is_zero() && c.num.sign() < 0 {
        Cusp { num: -c.num, den: c.den }
    } else {
        c
    }
}

/// True iff both columns of `m` have pseudo-Euclidean gcd exactly 1.
pub fn is_member(m: &Matrix2) -> bool {
    let ok = |x: &AlgInt, y: &AlgInt| matches!(gcd_q(x, y), Ok(g) if g.is_unit_gcd());
    ok(m.a(), m.b()) && ok(m.c(), m.d())
}

/// Like `is_member`, also reporting the gcd outcome of the first failing column.
pub fn membership_report(m: &Matrix2) -> Result<(bool, Vec<GcdOutcome>)> {
    let g1 = gcd_q(m.a(), m.b())?;
    let g2 = gcd_q(m.c(), m.d())?;
    let ok = g1.is_unit_gcd() && g2.is_unit_gcd();
    Ok((ok, vec![g1, g2]))
}

/// A generator power appearing in a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T(i64),
    R(i64),
    U(i64),
}

impl Letter {
    pub fn matrix(&self, ctx: &Ctx) -> Matrix2 {
        match *self {
            Letter::S => Matrix2::s(ctx),
            Letter::T(k) => Matrix2::t(ctx).pow(k),
            Letter::R(k) => Matrix2::r(ctx).pow(k),
            Letter::U(k) => Matrix2::u(ctx).pow(k),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (g, k) = match *self {
            Letter::S => return f.write_str("S"),
            Letter::T(k) => ("T", k),
            Letter::R(k) => ("R", k),
            Letter::U(k) => ("U", k),
        };
        if k == 1 {
            f.write_str(g)
        } else {
            write!(f, "{g}^{k}")
        }
    }
}

/// A word in S and powers of T, R, U; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses space-separated letters such as `T^3 S R^-1 U`; `1` is the empty word.
    fn from_str(s: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (g, k) = match tok.split_once('^') {
                Some((g, k)) => (g, k.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in '{tok}'")))?),
                None => (tok, 1),
            };
            out.push(match g {
                "S" if k.rem_euclid(2) == 1 => Letter::S,
                "S" => continue,
                "T" => Letter::T(k),
                "R" => Letter::R(k),
                "U" => Letter::U(k),
                _ => return Err(Error::Parse(format!("unknown letter '{tok}'"))),
            });
        }
        Ok(Word(out))
    }
}

impl Word {
    /// Rewrites over {S, R} using T = R⁻¹S and U = RS.
    pub fn to_sr(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for l in &self.0 {
            match *l {
                Letter::S | Letter::R(_) => out.push(*l),
                Letter::T(k) => {
                    for _ in 0..k.unsigned_abs() {
                        if k > 0 {
                            out.extend([Letter::R(-1), Letter::S]);
                        } else {
                            out.extend([Letter::S, Letter::R(1)]);
                        }
                    }
                }
                Letter::U(k) => {
                    for _ in 0..k.unsigned_abs() {
                        if k > 0 {
                            out.extend([Letter::R(1), Letter::S]);
                        } else {
                            out.extend([Letter::S, Letter::R(-1)]);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Product of the letter matrices from left to right.
pub fn evaluate(ctx: &Ctx, word: &Word) -> Matrix2 {
    word.0.iter().fold(Matrix2::identity(ctx), |acc, l| &acc * &l.matrix(ctx))
}

fn small(m: &BigInt) -> Result<i64> {
    m.to_i64().ok_or_else(|| Error::InvalidInput("exponent does not fit in 64 bits".into()))
}

/// Writes `m` as `T^{m0} S T^{m1} S … T^{k}` by running the pseudo-Euclidean
/// algorithm on its first column.
pub fn decompose(m: &Matrix2) -> Result<Word> {
    let ctx = m.ctx().clone();
    let one = AlgInt::one(&ctx);
    let mut cur = m.clone();
    let mut letters = Vec::new();
    let mut steps = 0usize;
    while !cur.b().is_zero() {
        if cur.b().abs().cmp_value(&one) == Ordering::Less {
            return Err(Error::NotMember);
        }
        let (q, _) = pea_step(cur.a(), cur.b())?;
        let k = small(&q)?;
        if k != 0 {
            letters.push(Letter::T(k));
        }
        letters.push(Letter::S);
        cur = &(&Matrix2::s(&ctx) * &Matrix2::t(&ctx).pow(-k)) * &cur;
        steps += 1;
        if steps > 100_000 {
            return Err(Error::NotMember);
        }
    }
    // cur = ±[[1, kλ], [0, 1]] after sign normalization
    if !cur.a().is_one() || !cur.d().is_one() {
        return Err(Error::NotMember);
    }
    let k = cur.c().as_lambda_multiple().ok_or(Error::NotMember)?;
    let k = small(&k)?;
    if k != 0 {
        letters.push(Letter::T(k));
    }
    Ok(Word(letters))
}

/// The q cusps c_1 … c_q of the q-gon with even line `(c1, cq)`, by the
/// three-term recurrence seeded with `(a_0, b_0) = (-a_q, -b_q)`.
pub fn qgon_cusps(c1: &Cusp, cq: &Cusp) -> Result<Vec<Cusp>> {
    let ctx = c1.ctx().clone();
    if !c1.det_with(cq).is_one() {
        return Err(Error::NotAnEvenLine);
    }
    let q = ctx.q() as usize;
    let lam = AlgInt::lambda(&ctx);
    let mut out = Vec::with_capacity(q);
    out.push(c1.clone());
    let (mut pa, mut pb) = (-cq.num(), -cq.den());
    let (mut a, mut b) = (c1.num().clone(), c1.den().clone());
    for _ in 2..q {
        let na = &lam * &a - &pa;
        let nb = &lam * &b - &pb;
        pa = std::mem::replace(&mut a, na);
        pb = std::mem::replace(&mut b, nb);
        out.push(Cusp::new(a.clone(), b.clone())?);
    }
    let na = &lam * &a - &pa;
    let nb = &lam * &b - &pb;
    debug_assert!(na == *cq.num() && nb == *cq.den(), "q-gon recurrence did not close");
    out.push(cq.clone());
    Ok(out)
}

/// v_1 = 0, v_2, …, v_q = ∞: the depth-one q-gon in the right half plane.
pub fn depth_one_cusps(ctx: &Ctx) -> Vec<Cusp> {
    qgon_cusps(&Cusp::zero(ctx), &Cusp::infinity(ctx)).expect("(0, ∞) is an even line")
}

/// The matrix `[[a_w, a_u], [b_w, b_u]]` sending (0, ∞) to the even line (u, w).
pub fn frame(u: &Cusp, w: &Cusp) -> Result<Matrix2> {
    let det = u.det_with(w);
    if det.is_one() {
        Matrix2::new(w.num().clone(), w.den().clone(), u.num().clone(), u.den().clone())
    } else if (-&det).is_one() {
        Matrix2::new(-w.num(), -w.den(), u.num().clone(), u.den().clone())
    } else {
        Err(Error::NotAnEvenLine)
    }
}

/// Reduced form of `a/b`, found by dividing out the terminal remainder of the
/// pseudo-Euclidean chain. Gives up after `budget` steps.
pub fn reduce_cusp(a: &AlgInt, b: &AlgInt, budget: usize) -> Result<Cusp> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::InvalidInput("cusp 0/0".into()));
    }
    let ctx = a.ctx().clone();
    let r = full_chain_gcd(a, b, budget)?.ok_or(Error::NotReducedWithinBudget(budget))?;
    for cand in [r.clone(), -&r] {
        let (Ok(n), Ok(d)) = (a.exact_div(&cand), b.exact_div(&cand)) else {
            continue;
        };
        let c = if d.is_zero() {
            if n.sign() > 0 {
                Cusp::infinity(&ctx)
            } else {
                Cusp::neg_infinity(&ctx)
            }
        } else {
            Cusp::new(n, d)?
        };
        if c.is_reduced() {
            return Ok(c);
        }
    }
    Err(Error::NotReducedWithinBudget(budget))
}
