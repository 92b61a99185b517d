//! Geometric invariants of a subgroup and the constructions that realize a
//! prescribed signature or free-product type.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::algebra::{make_context, Ctx};
use crate::builder::build_polygon;
use crate::builtins;
use crate::error::{Error, Infeasibility, Result};
use crate::farey::{FareySymbol, IntervalLabel};
use crate::moebius::{depth_one_cusps, frame, qgon_cusps, Cusp, Matrix2};
use crate::oracle::{MembershipOracle, OracleKind};
use crate::perm::{group_order, is_transitive, Perm};
use crate::permrep::Omega;

/// Divisors r of q with 2 ≤ r ≤ q.
pub fn elliptic_orders(q: u32) -> Vec<u32> {
    (2..=q).filter(|r| q % r == 0).collect()
}

/// The geometric invariants of a finite-index subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub q: u32,
    /// Index in G_q.
    pub d: u64,
    pub g: u64,
    /// Classes of elements conjugate to S.
    pub tau2: u64,
    /// Order r ↦ classes of elements conjugate to R^{q/r}, for every r in [`elliptic_orders`].
    pub v: BTreeMap<u32, u64>,
    pub v_inf: u64,
    /// Side pairings of infinite order.
    pub f: u64,
    /// Number of q-gons.
    pub n0: u64,
    pub m0: i64,
}

impl Signature {
    pub fn v_r(&self, r: u32) -> u64 {
        self.v.get(&r).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let v: serde_json::Map<String, Value> = self.v.iter().map(|(r, c)| (r.to_string(), json!(c))).collect();
        json!({
            "q": self.q, "d": self.d, "g": self.g, "tau2": self.tau2, "v": v,
            "v_inf": self.v_inf, "f": self.f, "n0": self.n0, "m0": self.m0,
        })
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.v.iter().map(|(r, c)| format!("v{r}={c}")).collect();
        write!(
            f,
            "q={} d={} g={} tau2={} {} v_inf={} f={} n0={}",
            self.q,
            self.d,
            self.g,
            self.tau2,
            v.join(" "),
            self.v_inf,
            self.f,
            self.n0
        )
    }
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptSymbol(msg.into())
}

/// Reads the invariants off a valid symbol.
pub fn signature_of(sym: &FareySymbol) -> Result<Signature> {
    let q = sym.q();
    let qi = q as i64;
    let d = sym.index()? as i64;
    let (even, odd, free, clusters) = sym.census();
    let mut v: BTreeMap<u32, u64> = elliptic_orders(q).into_iter().map(|r| (r, 0)).collect();
    *v.get_mut(&q).expect("q is an elliptic order") += odd as u64;
    for r in clusters {
        *v.get_mut(&(q / r)).ok_or_else(|| corrupt(format!("cluster size {r} does not divide {q}")))? += 1;
    }
    let v_inf = sym.cusp_class_count() as i64;
    let f_t_cycles = Omega::of(sym)?.cusp_count() as i64;
    if f_t_cycles != v_inf {
        return Err(corrupt(format!("{v_inf} cusp classes but f(T) has {f_t_cycles} cycles")));
    }
    let tau2 = even as i64;
    // 4q(g - 1) = d(q - 2) - q·tau2 - Σ v_r(2q - 2q/r) - 2q·v_inf
    let elliptic: i64 = v.iter().map(|(&r, &c)| c as i64 * (2 * qi - 2 * qi / r as i64)).sum();
    let rhs = d * (qi - 2) - qi * tau2 - elliptic - 2 * qi * v_inf;
    if rhs % (4 * qi) != 0 || rhs / (4 * qi) + 1 < 0 {
        return Err(corrupt(format!("genus from the Riemann-Hurwitz formula is not a nonnegative integer ({rhs}/{})", 4 * qi)));
    }
    let g = rhs / (4 * qi) + 1;
    let n0 = sym.qgon_count()? as i64;
    let two_f: i64 = n0 * (qi - 2) + v.iter().map(|(&r, &c)| c as i64 * (qi / r as i64 - 2)).sum::<i64>() + 2 - tau2;
    if two_f != 2 * free as i64 {
        return Err(corrupt(format!("{free} free pairs but the generator count gives {two_f}/2")));
    }
    let m0 = 4 * g - 4 + tau2 + 2 * v_inf + v.iter().map(|(&r, &c)| c as i64 * (2 - qi / r as i64)).sum::<i64>();
    if m0 != n0 * (qi - 2) {
        return Err(corrupt(format!("m0 = {m0} but there are {n0} q-gons")));
    }
    Ok(Signature {
        q,
        d: d as u64,
        g: g as u64,
        tau2: tau2 as u64,
        v,
        v_inf: v_inf as u64,
        f: free as u64,
        n0: n0 as u64,
        m0,
    })
}

/// Exact Riemann–Hurwitz test, scaled by 4q to stay in integers.
pub fn check_riemann_hurwitz(sig: &Signature) -> bool {
    rh_defect(sig.q, sig.d, sig.g, sig.tau2, &sig.v, sig.v_inf) == 0
}

fn rh_defect(q: u32, d: u64, g: u64, tau2: u64, v: &BTreeMap<u32, u64>, v_inf: u64) -> i128 {
    let q = q as i128;
    let elliptic: i128 = v.iter().map(|(&r, &c)| c as i128 * (2 * q - 2 * q / r as i128)).sum();
    4 * q * (g as i128 - 1) + q * tau2 as i128 + elliptic + 2 * q * v_inf as i128 - d as i128 * (q - 2)
}

/// The data of a requested signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureRequest {
    pub q: u32,
    pub d: u64,
    pub g: u64,
    pub tau2: u64,
    /// Order r ↦ count; missing orders count as zero.
    pub v: BTreeMap<u32, u64>,
    pub v_inf: u64,
}

impl From<&Signature> for SignatureRequest {
    fn from(s: &Signature) -> Self {
        SignatureRequest { q: s.q, d: s.d, g: s.g, tau2: s.tau2, v: s.v.clone(), v_inf: s.v_inf }
    }
}

/// A realized subgroup: the whole group has no symbol of its own.
#[derive(Clone, Debug)]
pub enum Realization {
    WholeGroup,
    Symbol(FareySymbol),
}

fn check_orders(q: u32, v: &BTreeMap<u32, u64>, min: u32) -> Result<()> {
    for &r in v.keys() {
        if r < min || r > q || q % r != 0 {
            return Err(Error::InvalidParameter(format!("order {r} is not a divisor of {q} in {min}..={q}")));
        }
    }
    Ok(())
}

/// Cusp list and labels of a convex polygon made of `n0` q-gons and clusters of
/// the given sizes, every tile attached along the even line to the right of 0.
/// Ordinary intervals are left as `None`.
fn tile_polygon(ctx: &Ctx, n0: u64, mut clusters: Vec<u32>) -> Result<(Vec<Cusp>, Vec<Option<IntervalLabel>>)> {
    let q = ctx.q() as usize;
    clusters.sort_unstable_by(|a, b| b.cmp(a));
    let v = depth_one_cusps(ctx);
    let (ninf, inf) = (Cusp::neg_infinity(ctx), Cusp::infinity(ctx));
    let mut remaining_qgons = n0;
    let mut cusps;
    let mut labels: Vec<Option<IntervalLabel>>;
    if remaining_qgons > 0 {
        remaining_qgons -= 1;
        cusps = vec![ninf];
        cusps.extend(v[..q - 1].iter().cloned());
        cusps.push(inf);
        labels = vec![None; q];
    } else {
        let s = clusters.remove(0) as usize;
        cusps = vec![ninf];
        cusps.extend(v[..s].iter().cloned());
        cusps.push(inf);
        labels = vec![None; s];
        labels.push(Some(IntervalLabel::Cluster { r: s as u32, g: Matrix2::identity(ctx) }));
    }
    // Cusp 0 always sits at index 1, so the attaching line is (cusps[1], cusps[2]).
    let tiles = std::iter::repeat(q as u32).take(remaining_qgons as usize).chain(clusters);
    for s in tiles {
        let s = s as usize;
        let c = qgon_cusps(&cusps[1], &cusps[2])?;
        let a = frame(&cusps[1], &cusps[2])?;
        let inner: Vec<Cusp> = c[1..s.min(q - 1)].to_vec();
        let mut new_labels = vec![None; inner.len() + 1];
        if s < q {
            new_labels[s - 1] = Some(IntervalLabel::Cluster { r: s as u32, g: a });
        }
        cusps.splice(2..2, inner);
        labels.splice(1..2, new_labels);
    }
    Ok((cusps, labels))
}

/// Fills the ordinary slots in order and assembles the symbol.
fn fill(ctx: &Ctx, cusps: Vec<Cusp>, slots: Vec<Option<IntervalLabel>>, ordinary: Vec<IntervalLabel>) -> Result<FareySymbol> {
    let mut it = ordinary.into_iter();
    let labels: Vec<IntervalLabel> = slots
        .into_iter()
        .map(|s| s.or_else(|| it.next()).ok_or_else(|| corrupt("too few ordinary labels")))
        .collect::<Result<_>>()?;
    if it.next().is_some() {
        return Err(corrupt("too many ordinary labels"));
    }
    FareySymbol::new(ctx, cusps, labels)?.checked()
}

/// Builds a subgroup with the requested signature, or names the condition
/// that rules it out.
pub fn realize(req: &SignatureRequest) -> Result<Realization> {
    let q = req.q;
    let ctx = make_context(q)?;
    if req.d == 0 || req.v_inf == 0 {
        return Err(Error::InvalidParameter("index and cusp count must be at least 1".into()));
    }
    check_orders(q, &req.v, 2)?;
    if rh_defect(q, req.d, req.g, req.tau2, &req.v, req.v_inf) != 0 {
        return Err(Error::Infeasible(Infeasibility::RiemannHurwitz));
    }
    let qi = q as i64;
    let vr = |r: u32| req.v.get(&r).copied().unwrap_or(0);
    let m0 = 4 * req.g as i64 - 4 + req.tau2 as i64 + 2 * req.v_inf as i64
        + req.v.iter().map(|(&r, &c)| c as i64 * (2 - qi / r as i64)).sum::<i64>();
    if m0 < 0 {
        return Err(Error::Infeasible(Infeasibility::M0Negative));
    }
    if m0 % (qi - 2) != 0 {
        return Err(Error::Infeasible(Infeasibility::M0NotMultiple));
    }
    let n0 = (m0 / (qi - 2)) as u64;
    let clusters: Vec<u32> = req
        .v
        .iter()
        .filter(|(&r, _)| r < q)
        .flat_map(|(&r, &c)| std::iter::repeat(q / r).take(c as usize))
        .collect();
    if n0 == 0 && clusters.is_empty() {
        return match (req.d, vr(q)) {
            (1, _) => Ok(Realization::WholeGroup),
            (2, 2) => Ok(Realization::Symbol(builtins::index2_m1(q)?)),
            _ => Err(Error::Infeasible(Infeasibility::RiemannHurwitz)),
        };
    }
    let (cusps, slots) = tile_polygon(&ctx, n0, clusters)?;
    let mut ordinary = vec![IntervalLabel::Even; req.tau2 as usize];
    ordinary.extend(std::iter::repeat(IntervalLabel::Odd).take(vr(q) as usize));
    let mut tag = 0;
    for _ in 1..req.v_inf {
        tag += 1;
        ordinary.extend([IntervalLabel::Free(tag), IntervalLabel::Free(tag)]);
    }
    for _ in 0..req.g {
        let (x, y) = (tag + 1, tag + 2);
        tag += 2;
        ordinary.extend([x, y, x, y].map(IntervalLabel::Free));
    }
    let sym = fill(&ctx, cusps, slots, ordinary)?;
    let got = SignatureRequest::from(&signature_of(&sym)?);
    let mut want = req.clone();
    want.v = elliptic_orders(q).into_iter().map(|r| (r, vr(r))).collect();
    if got != want {
        return Err(corrupt(format!("realized signature {got:?} differs from the request")));
    }
    Ok(Realization::Symbol(sym))
}

/// A free product of `f` infinite cyclic groups, `pi2` copies of Z/2 and
/// `v[r]` copies of Z/r (r ≥ 3).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeProductType {
    pub f: u64,
    pub pi2: u64,
    pub v: BTreeMap<u32, u64>,
}

impl FreeProductType {
    pub fn v_r(&self, r: u32) -> u64 {
        self.v.get(&r).copied().unwrap_or(0)
    }

    fn add(&mut self, order: Option<u32>, k: u64) {
        match order {
            None => self.f += k,
            Some(2) => self.pi2 += k,
            Some(r) => *self.v.entry(r).or_default() += k,
        }
    }

    /// Free-product type of the group generated by the side pairings of `sym`.
    pub fn of_symbol(sym: &FareySymbol) -> Result<FreeProductType> {
        let mut t = FreeProductType::default();
        for g in sym.generators()? {
            t.add(g.order(sym.q()), 1);
        }
        t.v.retain(|_, c| *c > 0);
        Ok(t)
    }
}

impl fmt::Display for FreeProductType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.f > 0 {
            parts.push(format!("F{}", self.f));
        }
        if self.pi2 > 0 {
            parts.push(format!("Z2^{}", self.pi2));
        }
        for (r, c) in &self.v {
            if *c > 0 {
                parts.push(format!("Z{r}^{c}"));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" * "))
        }
    }
}

impl FromStr for FreeProductType {
    type Err = Error;

    /// Parses factors such as `F2 * Z2^3 * Z5` (`Z` alone is infinite cyclic).
    fn from_str(s: &str) -> Result<FreeProductType> {
        let mut t = FreeProductType::default();
        let bad = |p: &str| Error::Parse(format!("bad free-product factor '{p}'"));
        for part in s.split('*').map(str::trim).filter(|p| !p.is_empty() && *p != "1") {
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<u64>().map_err(|_| bad(part))?),
                None => (part, 1),
            };
            if base == "Z" {
                t.add(None, exp);
            } else if let Some(n) = base.strip_prefix('F') {
                t.add(None, exp * n.parse::<u64>().map_err(|_| bad(part))?);
            } else if let Some(n) = base.strip_prefix('Z') {
                let n: u32 = n.parse().map_err(|_| bad(part))?;
                if n < 2 {
                    return Err(bad(part));
                }
                t.add(Some(n), exp);
            } else {
                return Err(bad(part));
            }
        }
        t.v.retain(|_, c| *c > 0);
        Ok(t)
    }
}

/// Builds a subgroup isomorphic to the given free product.
pub fn realize_kurosh(q: u32, ty: &FreeProductType) -> Result<FareySymbol> {
    let ctx = make_context(q)?;
    check_orders(q, &ty.v, 3)?;
    let others = ty.v.iter().any(|(&r, &c)| r != q && c > 0);
    let vq = ty.v_r(q);
    if ty.f == 0 && !others && ((ty.pi2 == 1 && vq == 1) || (ty.pi2 == 0 && vq == 2)) {
        return Err(Error::ExplicitFamily(if vq == 1 {
            "Z2 * Zq is the whole group G_q".into()
        } else {
            "Zq * Zq is the index-2 subgroup generated by the conjugates of R (builtin index2_M1)".into()
        }));
    }
    let qi = q as i64;
    let (f, pi2) = (ty.f as i64, ty.pi2 as i64);
    let cluster_term: i64 = ty.v.iter().map(|(&r, &c)| c as i64 * (2 - qi / r as i64)).sum();
    // Number of order-2 factors realized by conjugates of R^{q/2}.
    let t = if q % 2 == 1 {
        if 2 * f + pi2 + vq as i64 - 2 <= 0 {
            return Err(Error::Infeasible(Infeasibility::KuroshPositivity));
        }
        let m0 = 2 * f + pi2 + cluster_term - 2;
        if m0 < 0 {
            return Err(Error::Infeasible(Infeasibility::M0Negative));
        }
        if m0 % (qi - 2) != 0 {
            return Err(Error::Infeasible(Infeasibility::M0NotMultiple));
        }
        0
    } else {
        let v_half = if q / 2 >= 3 { ty.v_r(q / 2) } else { 0 };
        (0..=pi2)
            .find(|&t| {
                let m0 = 2 * f + (pi2 - t) + t * (2 - qi / 2) + cluster_term - 2;
                let lead = 2 * f + (pi2 - t) + vq as i64 - 2;
                m0 >= 0 && m0 % (qi - 2) == 0 && lead >= 0 && (lead, t, v_half) != (0, 0, 0)
            })
            .ok_or(Error::Infeasible(Infeasibility::KuroshNoSplit))?
    };
    let m0 = 2 * f + (pi2 - t) + t * (2 - qi / 2) + cluster_term - 2;
    let n0 = (m0 / (qi - 2)) as u64;
    let mut clusters: Vec<u32> = ty
        .v
        .iter()
        .filter(|(&r, _)| r < q)
        .flat_map(|(&r, &c)| std::iter::repeat(q / r).take(c as usize))
        .collect();
    clusters.extend(std::iter::repeat(q / 2).take(t as usize));
    if n0 == 0 && clusters.is_empty() {
        return Err(Error::Infeasible(Infeasibility::KuroshPositivity));
    }
    let (cusps, slots) = tile_polygon(&ctx, n0, clusters)?;
    let mut ordinary = vec![IntervalLabel::Even; (pi2 - t) as usize];
    ordinary.extend(std::iter::repeat(IntervalLabel::Odd).take(vq as usize));
    for k in 1..=ty.f as u32 {
        ordinary.extend([IntervalLabel::Free(k), IntervalLabel::Free(k)]);
    }
    let sym = fill(&ctx, cusps, slots, ordinary)?;
    let got = FreeProductType::of_symbol(&sym)?;
    if &got != ty {
        return Err(corrupt(format!("realized type {got} differs from the request {ty}")));
    }
    Ok(sym)
}

/// Symbol of the kernel of the regular action S ↦ `s`, R ↦ `r`.
pub fn kernel_from_quotient(q: u32, s: &Perm, r: &Perm) -> Result<FareySymbol> {
    let ctx = make_context(q)?;
    let n = s.degree();
    if r.degree() != n {
        return Err(Error::InvalidInput("permutations of different degrees".into()));
    }
    let gens = [s.clone(), r.clone()];
    if !s.pow(2).is_identity() || !r.pow(q as i64).is_identity() {
        return Err(Error::InvalidInput(format!("need s^2 = 1 and r^{q} = 1")));
    }
    if !is_transitive(&gens, n) || group_order(&gens, n) != n.into() {
        return Err(Error::NotRegular);
    }
    let oracle = MembershipOracle::new(&ctx, OracleKind::PermQuotient { s: s.clone(), r: r.clone(), base: 0 })?;
    let sym = build_polygon(&oracle, &ctx, n)?;
    if sym.index()? != n || !Omega::of(&sym)?.is_normal() {
        return Err(Error::OracleInconsistent("kernel symbol is not normal of the expected index".into()));
    }
    Ok(sym)
}

/// Normal subgroups containing S, by isomorphism type.
#[derive(Clone, Debug)]
pub enum NormalWithS {
    /// Free product of q copies of Z/2.
    TypeA(FareySymbol),
    /// Free product of Z/(q/r) and r copies of Z/2.
    TypeB { r: u32, symbol: FareySymbol },
    NotRealizable,
}

pub fn classify_normal_with_s(q: u32, ty: &FreeProductType) -> Result<NormalWithS> {
    if q < 3 {
        return Err(Error::InvalidParameter(format!("q must be at least 3, got {q}")));
    }
    let orders: Vec<(u32, u64)> = ty.v.iter().filter(|(_, &c)| c > 0).map(|(&r, &c)| (r, c)).collect();
    if ty.f == 0 && orders.is_empty() && ty.pi2 == q as u64 {
        return Ok(NormalWithS::TypeA(builtins::normal_a(q)?));
    }
    if ty.f == 0 {
        for r in (1..q).filter(|r| q % r == 0) {
            let k = q / r;
            let matches = if k >= 3 {
                orders == [(k, 1)] && ty.pi2 == r as u64
            } else {
                orders.is_empty() && ty.pi2 == r as u64 + 1
            };
            if matches {
                return Ok(NormalWithS::TypeB { r, symbol: builtins::normal_b(q, r)? });
            }
        }
    }
    Ok(NormalWithS::NotRealizable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{commutator, fixture, gamma0_2, principal2, FIXTURES};

    #[test]
    fn family_signatures() {
        let s = signature_of(&commutator(5).unwrap()).unwrap();
        assert_eq!((s.d, s.g, s.v_inf, s.tau2, s.v_r(5)), (10, 2, 1, 0, 0));
        let s = signature_of(&principal2(5).unwrap()).unwrap();
        assert_eq!((s.d, s.g, s.v_inf), (10, 0, 5));
        let s = signature_of(&gamma0_2(5).unwrap()).unwrap();
        assert_eq!((s.d, s.g, s.tau2, s.v_inf), (5, 0, 1, 3));
        for (name, _) in FIXTURES {
            assert!(check_riemann_hurwitz(&signature_of(&fixture(name).unwrap()).unwrap()), "{name}");
        }
    }

    #[test]
    fn realize_round_trip() {
        for (name, _) in FIXTURES {
            let sig = signature_of(&fixture(name).unwrap()).unwrap();
            let req = SignatureRequest::from(&sig);
            match realize(&req).unwrap() {
                Realization::Symbol(s) => assert_eq!(signature_of(&s).unwrap(), sig, "{name}"),
                Realization::WholeGroup => panic!("{name}"),
            }
        }
    }

    #[test]
    fn kurosh_examples() {
        let t: FreeProductType = "F2 * Z2".parse().unwrap();
        let s = realize_kurosh(5, &t).unwrap();
        assert_eq!(FreeProductType::of_symbol(&s).unwrap(), t);
        assert!(matches!(realize_kurosh(5, &"Z2*Z5".parse().unwrap()), Err(Error::ExplicitFamily(_))));
        let s = realize_kurosh(4, &"Z * Z2".parse().unwrap()).unwrap();
        assert_eq!(FreeProductType::of_symbol(&s).unwrap().pi2, 1);
    }
}
