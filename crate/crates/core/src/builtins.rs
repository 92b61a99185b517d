//! Named subgroup families and the bundled fixture symbols.

use crate::algebra::{make_context, Ctx};
use crate::error::{Error, Result};
use crate::farey::{FareySymbol, IntervalLabel};
use crate::moebius::{depth_one_cusps, Cusp, Matrix2};

/// Fixture symbols shipped with the crate, by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("q6-index9", include_str!("../fixtures/q6-index9.txt")),
    ("q6-index3", include_str!("../fixtures/q6-index3.txt")),
    ("q6-parity", include_str!("../fixtures/q6-parity.txt")),
    ("q3-index11", include_str!("../fixtures/q3-index11.txt")),
    ("q3-normal12", include_str!("../fixtures/q3-normal12.txt")),
    ("q4-genus1", include_str!("../fixtures/q4-genus1.txt")),
    ("q3-noncongruence", include_str!("../fixtures/q3-noncongruence.txt")),
];

pub fn fixture(name: &str) -> Result<FareySymbol> {
    let text = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::InvalidInput(format!("unknown fixture '{name}'")))?;
    FareySymbol::parse(text)
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

fn ctx_for(q: u32) -> Result<Ctx> {
    make_context(q)
}

/// -∞, -v_{q-1}, …, -v_2, 0, v_2, …, v_{q-1}, +∞.
fn double_qgon_cusps(ctx: &Ctx) -> Vec<Cusp> {
    let v = depth_one_cusps(ctx);
    let q = v.len();
    let mut out = vec![Cusp::neg_infinity(ctx)];
    out.extend(v[1..q - 1].iter().rev().map(|c| c.neg()));
    out.push(Cusp::zero(ctx));
    out.extend(v[1..q - 1].iter().cloned());
    out.push(Cusp::infinity(ctx));
    out
}

/// The commutator subgroup: two depth-one q-gons with mirrored free sides.
pub fn commutator(q: u32) -> Result<FareySymbol> {
    let ctx = ctx_for(q)?;
    let tags = (1..q).chain(1..q).map(IntervalLabel::Free).collect();
    FareySymbol::new(&ctx, double_qgon_cusps(&ctx), tags)
}

/// The principal congruence subgroup of level 2 (q prime).
pub fn principal2(q: u32) -> Result<FareySymbol> {
    if !is_prime(q) {
        return Err(Error::InvalidParameter(format!("principal2 needs prime q, got {q}")));
    }
    let ctx = ctx_for(q)?;
    let tags = (1..q).chain((1..q).rev()).map(IntervalLabel::Free).collect();
    FareySymbol::new(&ctx, double_qgon_cusps(&ctx), tags)
}

/// The level-2 Hecke congruence subgroup (q prime): one q-gon.
pub fn gamma0_2(q: u32) -> Result<FareySymbol> {
    if !is_prime(q) || q == 2 {
        return Err(Error::InvalidParameter(format!("gamma0_2 needs odd prime q, got {q}")));
    }
    let ctx = ctx_for(q)?;
    let v = depth_one_cusps(&ctx);
    let mut cusps = vec![Cusp::neg_infinity(&ctx)];
    cusps.extend(v);
    let h = (q - 1) / 2;
    let mut labels: Vec<IntervalLabel> = (1..=h).map(IntervalLabel::Free).collect();
    labels.push(IntervalLabel::Even);
    labels.extend((1..=h).rev().map(IntervalLabel::Free));
    FareySymbol::new(&ctx, cusps, labels)
}

/// Index-2 subgroup generated by the conjugates of R: two odd triangles.
pub fn index2_m1(q: u32) -> Result<FareySymbol> {
    let ctx = ctx_for(q)?;
    FareySymbol::new(
        &ctx,
        vec![Cusp::neg_infinity(&ctx), Cusp::zero(&ctx), Cusp::infinity(&ctx)],
        vec![IntervalLabel::Odd, IntervalLabel::Odd],
    )
}

fn even_q(q: u32, what: &str) -> Result<()> {
    if q % 2 == 0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} needs even q, got {q}")))
    }
}

/// Index-2 subgroup containing S (q even).
pub fn index2_m2(q: u32) -> Result<FareySymbol> {
    even_q(q, "index2_M2")?;
    normal_b(q, 2)
}

/// The even subgroup (q even).
pub fn index2_m3(q: u32) -> Result<FareySymbol> {
    even_q(q, "index2_M3")?;
    let ctx = ctx_for(q)?;
    let v = depth_one_cusps(&ctx);
    FareySymbol::new(
        &ctx,
        vec![Cusp::neg_infinity(&ctx), Cusp::zero(&ctx), v[1].clone(), Cusp::infinity(&ctx)],
        vec![
            IntervalLabel::Free(1),
            IntervalLabel::Free(1),
            IntervalLabel::Cluster { r: 2, g: Matrix2::identity(&ctx) },
        ],
    )
}

/// The power subgroup G_q^r for an odd divisor r > 1 of q.
pub fn power(q: u32, r: u32) -> Result<FareySymbol> {
    if r <= 1 || r % 2 == 0 || q % r != 0 {
        return Err(Error::InvalidParameter(format!("power needs an odd divisor r > 1 of q, got r={r}, q={q}")));
    }
    normal_b(q, r)
}

/// Normal subgroup of index q containing S: a depth-one q-gon with all sides even.
pub fn normal_a(q: u32) -> Result<FareySymbol> {
    let ctx = ctx_for(q)?;
    let mut cusps = vec![Cusp::neg_infinity(&ctx)];
    cusps.extend(depth_one_cusps(&ctx));
    FareySymbol::new(&ctx, cusps, vec![IntervalLabel::Even; q as usize])
}

/// Normal subgroup of index r containing S: an r-cluster with even sides.
pub fn normal_b(q: u32, r: u32) -> Result<FareySymbol> {
    if r == 0 || r >= q || q % r != 0 {
        return Err(Error::InvalidParameter(format!("normal_b needs a divisor r < q, got r={r}, q={q}")));
    }
    let ctx = ctx_for(q)?;
    let v = depth_one_cusps(&ctx);
    let mut cusps = vec![Cusp::neg_infinity(&ctx)];
    cusps.extend(v[..r as usize].iter().cloned());
    cusps.push(Cusp::infinity(&ctx));
    let mut labels = vec![IntervalLabel::Even; r as usize];
    labels.push(if r == 1 {
        IntervalLabel::Odd
    } else {
        IntervalLabel::Cluster { r, g: Matrix2::identity(&ctx) }
    });
    FareySymbol::new(&ctx, cusps, labels)
}

/// Family names accepted by [`builtin`].
pub const FAMILIES: &[&str] = &[
    "commutator",
    "principal2",
    "gamma0_2",
    "index2_M1",
    "index2_M2",
    "index2_M3",
    "power:<r>",
    "normal_a",
    "normal_b:<r>",
    "fixture:<name>",
];

/// Looks up a family by name, e.g. `commutator`, `power:3`, `fixture:q3-normal12`.
pub fn builtin(q: u32, family: &str) -> Result<FareySymbol> {
    let (name, arg) = match family.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => match family.split_once('(') {
            Some((n, a)) => (n, Some(a.trim_end_matches(')'))),
            None => (family, None),
        },
    };
    let num = || -> Result<u32> {
        arg.and_then(|a| a.trim().parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("family '{family}' needs an integer argument")))
    };
    match name {
        "commutator" => commutator(q),
        "principal2" => principal2(q),
        "gamma0_2" => gamma0_2(q),
        "index2_M1" | "m1" => index2_m1(q),
        "index2_M2" | "m2" => index2_m2(q),
        "index2_M3" | "m3" => index2_m3(q),
        "power" => power(q, num()?),
        "normal_a" => normal_a(q),
        "normal_b" => normal_b(q, num()?),
        "fixture" => fixture(arg.unwrap_or("")),
        _ => Err(Error::InvalidInput(format!("unknown family '{family}'"))),
    }
}
