//! Level and congruence test for subgroups of the modular group (q = 3).
//!
//! With L = f(T) and R = f(U) on the triangles of a symbol, a subgroup of
//! level N is congruence exactly when a short list of relations in L and R
//! holds. Products below compose as functions, matching [`Omega::f_word`].

use std::fmt;

use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::farey::FareySymbol;
use crate::perm::{group_order, Perm};
use crate::permrep::Omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Congruence,
    NonCongruence,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Congruence => "congruence",
            Verdict::NonCongruence => "non-congruence",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CongruenceReport {
    pub level: u64,
    pub verdict: Verdict,
    /// Each relation with whether it holds, in the order tested.
    pub relations: Vec<(String, bool)>,
    /// Word used for U.
    pub u_word: &'static str,
}

impl CongruenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "verdict": self.verdict.to_string(),
            "u_word": self.u_word,
            "relations": self.relations.iter().map(|(n, h)| json!({"name": n, "holds": h})).collect::<Vec<_>>(),
        })
    }
}

fn require_modular(sym: &FareySymbol) -> Result<()> {
    if sym.q() != 3 {
        return Err(Error::UnsupportedQ(sym.q()));
    }
    Ok(())
}

/// f(T) and f(U) on the triangles of `sym`.
pub fn lr(sym: &FareySymbol) -> Result<(Perm, Perm)> {
    require_modular(sym)?;
    let om = Omega::of(sym)?;
    Ok((om.f_t(), om.f_u()))
}

/// Order of f(T).
pub fn level(sym: &FareySymbol) -> Result<u64> {
    Ok(lr(sym)?.0.order())
}

/// Order of ⟨f(T), f(U)⟩, the quotient by the normal core.
pub fn monodromy_order(sym: &FareySymbol) -> Result<BigUint> {
    let (l, r) = lr(sym)?;
    Ok(group_order(&[l.clone(), r], l.degree()))
}

/// Functional product `a ∘ b` (b acts first).
fn mul(a: &Perm, b: &Perm) -> Perm {
    b.then(a)
}

fn prod(ps: &[&Perm]) -> Perm {
    ps.iter().fold(Perm::identity(ps[0].degree()), |acc, p| mul(&acc, p))
}

fn inv_mod(a: u64, n: u64) -> i64 {
    if n == 1 {
        return 0;
    }
    let e = num_integer::Integer::extended_gcd(&(a as i64), &(n as i64));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(n as i64)
}

/// Relation battery on L = f(T), R = f(U) for level `n`.
pub fn relations(l: &Perm, r: &Perm, n: u64) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let mut check = |name: &str, lhs: Perm, rhs: Perm| out.push((name.to_string(), lhs == rhs));
    let id = Perm::identity(l.degree());
    let mut e = 1u64;
    let mut m = n;
    while m % 2 == 0 {
        m /= 2;
        e *= 2;
    }
    if e == 1 {
        let half = inv_mod(2, n);
        let w = prod(&[r, r, &l.pow(-half)]);
        check("(R^2 L^(-1/2))^3 = 1", w.pow(3), id);
    } else if m == 1 {
        let fifth = inv_mod(5, n);
        let s = prod(&[&l.pow(20), &r.pow(fifth), &l.pow(-4), &r.inverse()]);
        let x = prod(&[l, &r.inverse(), l]);
        check("(L R^-1 L)^-1 S (L R^-1 L) = S^-1", prod(&[&x.inverse(), &s, &x]), s.inverse());
        check("S^-1 R S = R^25", prod(&[&s.inverse(), r, &s]), r.pow(25));
        check("(S R^5 L R^-1 L)^3 = 1", prod(&[&s, &r.pow(5), l, &r.inverse(), l]).pow(3), id);
    } else {
        // c = 0 mod e, c = 1 mod m and d = 1 mod e, d = 0 mod m.
        let c = (e as i64 * inv_mod(e, m)).rem_euclid(n as i64);
        let d = (m as i64 * inv_mod(m, e)).rem_euclid(n as i64);
        let (a, b) = (l.pow(c), r.pow(c));
        let (ll, rr) = (l.pow(d), r.pow(d));
        let fifth = inv_mod(5, e);
        let half = inv_mod(2, m);
        let s = prod(&[&ll.pow(20), &rr.pow(fifth), &ll.pow(-4), &rr.inverse()]);
        let aba = prod(&[&a, &b.inverse(), &a]);
        let lrl = prod(&[&ll, &rr.inverse(), &ll]);
        check("[a, r] = 1", mul(&a, &rr), mul(&rr, &a));
        check("(a b^-1 a)^4 = 1", aba.pow(4), id.clone());
        check("(a b^-1 a)^2 = (b^-1 a)^3", aba.pow(2), mul(&b.inverse(), &a).pow(3));
        check("(a b^-1 a)^2 = (b^2 a^(-1/2))^3", aba.pow(2), prod(&[&b, &b, &a.pow(-half)]).pow(3));
        check("(l r^-1 l)^-1 s (l r^-1 l) = s^-1", prod(&[&lrl.inverse(), &s, &lrl]), s.inverse());
        check("s^-1 r s = r^25", prod(&[&s.inverse(), &rr, &s]), rr.pow(25));
        check("(l r^-1 l)^2 = (s r^5 l r^-1 l)^3", lrl.pow(2), prod(&[&s, &rr.pow(5), &ll, &rr.inverse(), &ll]).pow(3));
    }
    out
}

pub fn is_congruence(sym: &FareySymbol) -> Result<CongruenceReport> {
    let (l, r) = lr(sym)?;
    let n = l.order();
    let relations = relations(&l, &r, n);
    let verdict = if relations.iter().all(|(_, h)| *h) { Verdict::Congruence } else { Verdict::NonCongruence };
    Ok(CongruenceReport { level: n, verdict, relations, u_word: "R S" })
}
