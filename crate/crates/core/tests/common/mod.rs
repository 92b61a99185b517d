//! Helpers shared by the integration tests: seeding, random inputs and
//! brute-force reference computations that avoid the library's own shortcuts.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use hecke_core::algebra::{make_context, Ctx};
use hecke_core::builder::build_polygon;
use hecke_core::farey::{FareySymbol, IntervalLabel};
use hecke_core::invariants::{realize, signature_of, Realization, SignatureRequest};
use hecke_core::maps::map_of;
use hecke_core::moebius::{evaluate, Letter, Matrix2, Word};
use hecke_core::oracle::{MembershipOracle, OracleKind};
use hecke_core::perm::{is_transitive, Perm};
use hecke_core::permrep::Omega;
use hecke_core::Infeasibility;
use num_rational::Ratio;
use proptest::test_runner::{Config, RngSeed};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed from `HECKE_TEST_SEED`, else the fixed default.
pub fn seed() -> u64 {
    std::env::var("HECKE_TEST_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed())
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic proptest configuration.
pub fn proptest_config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed()), failure_persistence: None, ..Config::default() }
}

pub fn ctx(q: u32) -> Ctx {
    make_context(q).expect("valid q")
}

/// A random word of `len` letters with small exponents.
pub fn random_word(rng: &mut impl Rng, q: u32, len: usize) -> Word {
    let q = q as i64;
    let letters = (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => Letter::S,
            1 => Letter::T(nonzero(rng, 3)),
            2 => Letter::R(rng.gen_range(1..q)),
            _ => Letter::U(nonzero(rng, 3)),
        })
        .collect();
    Word(letters)
}

fn nonzero(rng: &mut impl Rng, k: i64) -> i64 {
    let v = rng.gen_range(1..=k);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

pub fn random_element(rng: &mut impl Rng, ctx: &Ctx, max_len: usize) -> Matrix2 {
    let len = rng.gen_range(0..=max_len);
    evaluate(ctx, &random_word(rng, ctx.q(), len))
}

/// Random transitive pair (s, r) on `n` points with s² = 1 and r^q = 1. The
/// cycles of r are joined by s along a random spanning tree, then the
/// remaining points are paired or fixed at random. Some degrees admit no
/// transitive action (n = 3 for q = 5), so this gives up after 200 draws.
pub fn random_quotient(rng: &mut impl Rng, q: u32, n: usize) -> Option<(Perm, Perm)> {
    let divisors: Vec<usize> = (1..=q as usize).filter(|d| q as usize % d == 0).collect();
    'retry: for _ in 0..200 {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut next = 0;
        while next < n {
            let fits: Vec<usize> = divisors.iter().copied().filter(|&d| next + d <= n).collect();
            let d = if fits.contains(&(q as usize)) && rng.gen_bool(0.7) { q as usize } else { *fits.choose(rng).unwrap() };
            cycles.push((next..next + d).collect());
            next += d;
        }
        cycles.shuffle(rng);
        let mut pairs = Vec::new();
        let mut open: Vec<usize> = cycles[0].clone();
        for c in &cycles[1..] {
            if open.is_empty() {
                continue 'retry;
            }
            let x = open.swap_remove(rng.gen_range(0..open.len()));
            let k = rng.gen_range(0..c.len());
            pairs.push(vec![x, c[k]]);
            open.extend(c.iter().copied().filter(|&y| y != c[k]));
        }
        open.shuffle(rng);
        while open.len() >= 2 && rng.gen_bool(0.6) {
            let (a, b) = (open.pop().unwrap(), open.pop().unwrap());
            pairs.push(vec![a, b]);
        }
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.shuffle(rng);
        let map = |cs: &[Vec<usize>]| cs.iter().map(|c| c.iter().map(|&x| relabel[x]).collect()).collect::<Vec<Vec<usize>>>();
        let s = Perm::from_cycles(n, &map(&pairs)).unwrap();
        let r = Perm::from_cycles(n, &map(&cycles)).unwrap();
        assert!(is_transitive(&[s.clone(), r.clone()], n));
        return Some((s, r));
    }
    None
}

/// Parses cycles written with arbitrary labels, e.g. "(1 2b 3)(4)", into a
/// permutation of `om` after renaming through `relabel`.
pub fn perm_from_labels(om: &Omega, text: &str, relabel: &HashMap<&str, &str>) -> Perm {
    let n = om.size();
    let mut images: Vec<u32> = (0..n as u32).collect();
    for cyc in text.split(')').map(|c| c.trim().trim_start_matches('(')).filter(|c| !c.is_empty()) {
        let pts: Vec<usize> = cyc
            .split_whitespace()
            .map(|l| {
                let ours = relabel.get(l).unwrap_or_else(|| panic!("no relabel for {l}"));
                om.by_label(ours).unwrap_or_else(|| panic!("no triangle {ours}"))
            })
            .collect();
        for k in 0..pts.len() {
            images[pts[k]] = pts[(k + 1) % pts.len()] as u32;
        }
    }
    Perm::from_images(images).unwrap()
}

/// Number of permutations of `n ≤ 8` points commuting with every generator.
pub fn brute_centralizer_count(gens: &[Perm], n: usize) -> usize {
    let mut count = 0;
    let mut a: Vec<u32> = (0..n as u32).collect();
    permute_all(&mut a, 0, &mut |p| {
        let p = Perm::from_images(p.to_vec()).unwrap();
        if gens.iter().all(|g| p.then(g) == g.then(&p)) {
            count += 1;
        }
    });
    count
}

fn permute_all(a: &mut [u32], k: usize, f: &mut impl FnMut(&[u32])) {
    if k == a.len() {
        f(a);
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permute_all(a, k + 1, f);
        a.swap(k, i);
    }
}

type ModMat = [i64; 4];

fn mod_canon(m: ModMat, n: i64) -> ModMat {
    let p = m.map(|x| x.rem_euclid(n));
    let q = m.map(|x| (-x).rem_euclid(n));
    p.min(q)
}

fn mod_mul(x: ModMat, y: ModMat, n: i64) -> ModMat {
    // [a, b, c, d] is [[a, c], [b, d]].
    let [a, b, c, d] = x;
    let [e, f, g, h] = y;
    mod_canon([a * e + c * f, b * e + d * f, a * g + c * h, b * g + d * h], n)
}

/// Congruence test for a q = 3 symbol by exhausting the image of the modular
/// group in PSL(2, Z/N) × Sym(Ω), N the level: the subgroup contains Γ(N)
/// exactly when every matrix class carries a single permutation.
pub fn wohlfahrt_congruence(sym: &FareySymbol) -> (u64, bool) {
    let om = Omega::of(sym).unwrap();
    let (ft, fu) = (om.f_t(), om.f_u());
    let n = ft.order() as i64;
    if n == 1 {
        return (1, true);
    }
    let gens: [(ModMat, &Perm); 2] = [(mod_canon([1, 0, 1, 1], n), &ft), (mod_canon([1, 1, 0, 1], n), &fu)];
    let start = mod_canon([1, 0, 0, 1], n);
    let mut seen: HashMap<ModMat, Perm> = HashMap::from([(start, Perm::identity(om.size()))]);
    let mut queue = VecDeque::from([start]);
    while let Some(m) = queue.pop_front() {
        let p = seen[&m].clone();
        for (g, fg) in &gens {
            let nm = mod_mul(*g, m, n);
            let np = p.then(fg);
            match seen.get(&nm) {
                Some(old) if *old != np => return (n as u64, false),
                Some(_) => {}
                None => {
                    seen.insert(nm, np);
                    queue.push_back(nm);
                }
            }
        }
    }
    (n as u64, true)
}

/// Orders of the elliptic classes conjugate to powers of R: divisors r > 1 of q.
pub fn divisors_above_one(q: u32) -> Vec<u32> {
    (2..=q).filter(|r| q % r == 0).collect()
}

/// Riemann-Hurwitz through orbifold Euler characteristics:
/// 2g − 2 + v_∞ + τ₂/2 + Σ v_r (1 − 1/r) = d (1/2 − 1/q).
pub fn rh_rational(q: u32, d: u64, g: u64, tau2: u64, v: &BTreeMap<u32, u64>, v_inf: u64) -> bool {
    let r = |a: i64, b: i64| Ratio::new(a, b);
    let mut lhs = r(2 * g as i64 - 2 + v_inf as i64, 1) + r(tau2 as i64, 2);
    for (&o, &c) in v {
        lhs += r(c as i64, 1) * (r(1, 1) - r(1, o as i64));
    }
    lhs == r(d as i64, 1) * (r(1, 2) - r(1, q as i64))
}

/// Triangles left for q-gons after the clusters: d − Σ v_r·q/r.
pub fn qgon_triangles(q: u32, d: u64, v: &BTreeMap<u32, u64>) -> i64 {
    d as i64 - v.iter().map(|(&r, &c)| c as i64 * (q / r) as i64).sum::<i64>()
}

/// The condition a signature request should fail first, if any.
pub fn expected_infeasibility(q: u32, d: u64, g: u64, tau2: u64, v: &BTreeMap<u32, u64>, v_inf: u64) -> Option<Infeasibility> {
    if !rh_rational(q, d, g, tau2, v, v_inf) {
        return Some(Infeasibility::RiemannHurwitz);
    }
    let x = qgon_triangles(q, d, v);
    if x < 0 {
        Some(Infeasibility::M0Negative)
    } else if x % q as i64 != 0 {
        Some(Infeasibility::M0NotMultiple)
    } else {
        None
    }
}

/// (free pairs, q-gons, elliptic order ↦ cluster count) read off the labels.
pub fn label_census(sym: &FareySymbol) -> (u64, u64, BTreeMap<u32, u64>) {
    let q = sym.q();
    let mut free = 0;
    let mut v = BTreeMap::new();
    let mut cluster_triangles = 0u64;
    for l in sym.labels() {
        match l {
            IntervalLabel::Free(_) => free += 1,
            IntervalLabel::Odd => {
                *v.entry(q).or_insert(0) += 1;
                cluster_triangles += 1;
            }
            IntervalLabel::Cluster { r, .. } => {
                *v.entry(q / r).or_insert(0) += 1;
                cluster_triangles += *r as u64;
            }
            IntervalLabel::Even => {}
        }
    }
    let d = Omega::of(sym).unwrap().size() as u64;
    (free / 2, (d - cluster_triangles) / q as u64, v)
}

/// Symbol built from a random coset action of degree at most 3q.
pub fn random_built(rng: &mut impl Rng, q: u32) -> FareySymbol {
    let (n, (s, r)) = loop {
        let n = rng.gen_range(1..=3 * q as usize);
        if let Some(pair) = random_quotient(rng, q, n) {
            break (n, pair);
        }
    };
    let ctx = ctx(q);
    let o = MembershipOracle::new(&ctx, OracleKind::PermQuotient { s, r, base: 0 }).unwrap();
    let sym = build_polygon(&o, &ctx, 10 * n).unwrap();
    assert_eq!(sym.index().unwrap(), n);
    sym
}

/// A random request that the realization conditions accept, or `None`.
pub fn random_request(rng: &mut impl Rng, q: u32) -> Option<SignatureRequest> {
    let g = rng.gen_range(0..=2);
    let tau2 = rng.gen_range(0..=3);
    let v_inf = rng.gen_range(1..=3);
    let v: BTreeMap<u32, u64> = divisors_above_one(q).into_iter().map(|r| (r, rng.gen_range(0..=2))).collect();
    // d (1/2 − 1/q) = 2g − 2 + v_∞ + τ₂/2 + Σ v_r (1 − 1/r)
    let mut rhs = Ratio::from_integer(2 * g as i64 - 2 + v_inf as i64) + Ratio::new(tau2 as i64, 2);
    for (&r, &c) in &v {
        rhs += Ratio::from_integer(c as i64) * (Ratio::from_integer(1) - Ratio::new(1, r as i64));
    }
    let d = rhs / (Ratio::new(1, 2) - Ratio::new(1, q as i64));
    if !d.is_integer() || d.to_integer() < 1 {
        return None;
    }
    let d = d.to_integer() as u64;
    if expected_infeasibility(q, d, g, tau2, &v, v_inf).is_some() {
        return None;
    }
    Some(SignatureRequest { q, d, g, tau2, v, v_inf })
}

/// Symbol realized from a random feasible signature other than the whole group.
pub fn random_realized(rng: &mut impl Rng, q: u32) -> FareySymbol {
    loop {
        if let Some(req) = random_request(rng, q) {
            if let Realization::Symbol(s) = realize(&req).unwrap() {
                return s;
            }
        }
    }
}

/// Requests agree up to zero counts.
pub fn same_request(a: &SignatureRequest, b: &SignatureRequest) -> bool {
    let nz = |v: &BTreeMap<u32, u64>| v.iter().filter(|(_, c)| **c > 0).map(|(r, c)| (*r, *c)).collect::<Vec<_>>();
    (a.q, a.d, a.g, a.tau2, a.v_inf) == (b.q, b.d, b.g, b.tau2, b.v_inf) && nz(&a.v) == nz(&b.v)
}

/// Riemann-Hurwitz, Euler, the free-pair count and the cusp count, each
/// recomputed from the symbol's labels and its triangle set.
pub fn check_identities(sym: &FareySymbol) -> Result<(), String> {
    let q = sym.q();
    let sig = signature_of(sym).map_err(|e| e.to_string())?;
    let om = Omega::of(sym).map_err(|e| e.to_string())?;
    let (f, n0, v) = label_census(sym);
    let tau2 = sym.labels().iter().filter(|l| matches!(l, IntervalLabel::Even)).count() as u64;
    let d = om.size() as u64;
    let cusps = om.f_t().cycles().len() as u64;
    if (sig.d, sig.tau2, sig.f, sig.n0, sig.v_inf) != (d, tau2, f, n0, cusps) {
        return Err(format!("{sym}: signature {sig} disagrees with d={d} tau2={tau2} f={f} n0={n0} cusps={cusps}"));
    }
    if sym.cusp_class_count() as u64 != cusps {
        return Err(format!("{sym}: {} cusp classes, f(T) has {cusps} cycles", sym.cusp_class_count()));
    }
    if !rh_rational(q, d, sig.g, tau2, &v, cusps) {
        return Err(format!("{sym}: Riemann-Hurwitz fails for {sig}"));
    }
    let two_f = n0 as i64 * (q as i64 - 2) + v.iter().map(|(&r, &c)| c as i64 * ((q / r) as i64 - 2)).sum::<i64>() + 2 - tau2 as i64;
    if two_f != 2 * f as i64 {
        return Err(format!("{sym}: 2f = {} but the tile count gives {two_f}", 2 * f));
    }
    let (m, _) = map_of(sym).map_err(|e| e.to_string())?;
    let chi = (m.vertices + m.free_edges()) as i64 - m.edges as i64 + m.faces as i64;
    if chi != 2 - 2 * sig.g as i64 {
        return Err(format!("{sym}: Euler characteristic {chi}, genus {}", sig.g));
    }
    Ok(())
}

/// Requests over a grid of small invariants and indices, feasible or not.
pub fn signature_grid() -> Vec<SignatureRequest> {
    let mut out = Vec::new();
    for q in [3, 4, 5, 6, 7, 8, 9, 12] {
        let orders = divisors_above_one(q);
        for mask in 0..(1u32 << orders.len()) {
            let v: BTreeMap<u32, u64> = orders.iter().enumerate().map(|(k, &r)| (r, ((mask >> k) & 1) as u64)).collect();
            for g in 0..=2 {
                for tau2 in 0..=3 {
                    for v_inf in 1..=3 {
                        for d in 1..=6 * q as u64 {
                            out.push(SignatureRequest { q, d, g, tau2, v: v.clone(), v_inf });
                        }
                    }
                }
            }
        }
    }
    out
}
