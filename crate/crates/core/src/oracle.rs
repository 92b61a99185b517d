//! Membership oracles for subgroups of G_q and a registry that builds them
//! from short text specifications.
//!
//! Oracles are only asked about elements of G_q.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::algebra::{AlgInt, Ctx};
use crate::builtins;
use crate::error::{Error, Result};
use crate::farey::FareySymbol;
use crate::moebius::{decompose, Letter, Matrix2};
use crate::perm::{orbit, Perm};
use crate::permrep::Omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CongruenceShape {
    /// All entries congruent to those of ±I.
    Principal,
    /// Upper-right entry `c` vanishes.
    UpperZero,
    /// Lower-left entry `b` vanishes.
    LowerZero,
}

/// The supported oracle kinds.
#[derive(Clone, Debug)]
pub enum OracleKind {
    /// Stabilizer of `base` under the right action S ↦ `s`, R ↦ `r`.
    PermQuotient { s: Perm, r: Perm, base: usize },
    /// Entry conditions modulo `n·Z[λ_q]`.
    EntryCongruence { n: u64, shape: CongruenceShape },
    /// Kernel of S ↦ `s_img`, R ↦ `r_img` in Z/n.
    ExponentHom { n: u64, s_img: u64, r_img: u64 },
    /// Kernel of the abelianization G_q → Z/2 × Z/q.
    Abelianization,
    /// `h X h⁻¹` for the subgroup X of `inner`.
    Conjugate { inner: Box<OracleKind>, h: Matrix2 },
    Intersection(Vec<OracleKind>),
}

fn letters_of(m: &Matrix2) -> Option<Vec<Letter>> {
    decompose(m).ok().map(|w| w.to_sr())
}

/// (number of S letters, sum of R exponents) of the {S, R} normal form.
fn exponent_sums(m: &Matrix2) -> Option<(i64, i64)> {
    let mut s = 0;
    let mut r = 0;
    for l in letters_of(m)? {
        match l {
            Letter::S => s += 1,
            Letter::R(k) => r += k,
            _ => unreachable!("normal form uses S and R only"),
        }
    }
    Some((s, r))
}

fn divisible(x: &AlgInt, n: &BigInt) -> bool {
    x.coeffs().iter().all(|c| c.mod_floor(n).is_zero())
}

impl OracleKind {
    pub fn contains(&self, m: &Matrix2) -> bool {
        match self {
            OracleKind::PermQuotient { s, r, base } => {
                let Some(word) = letters_of(m) else { return false };
                let mut x = *base;
                for l in word {
                    x = match l {
                        Letter::S => s.apply(x),
                        Letter::R(k) => r.pow(k).apply(x),
                        _ => unreachable!("normal form uses S and R only"),
                    };
                }
                x == *base
            }
            OracleKind::EntryCongruence { n, shape } => {
                let n = BigInt::from(*n);
                let ctx = m.ctx();
                match shape {
                    CongruenceShape::UpperZero => divisible(m.c(), &n),
                    CongruenceShape::LowerZero => divisible(m.b(), &n),
                    CongruenceShape::Principal => {
                        if !divisible(m.b(), &n) || !divisible(m.c(), &n) {
                            return false;
                        }
                        [1i64, -1].iter().any(|&e| {
                            let one = AlgInt::from_i64(ctx, e);
                            divisible(&(m.a() - &one), &n) && divisible(&(m.d() - &one), &n)
                        })
                    }
                }
            }
            OracleKind::ExponentHom { n, s_img, r_img } => match exponent_sums(m) {
                Some((s, r)) => {
                    let n = *n as i128;
                    (s as i128 * *s_img as i128 + r as i128 * *r_img as i128).rem_euclid(n) == 0
                }
                None => false,
            },
            OracleKind::Abelianization => {
                let q = m.ctx().q() as i64;
                matches!(exponent_sums(m), Some((s, r)) if s.rem_euclid(2) == 0 && r.rem_euclid(q) == 0)
            }
            OracleKind::Conjugate { inner, h } => inner.contains(&(&(&h.inverse() * m) * h)),
            OracleKind::Intersection(parts) => parts.iter().all(|p| p.contains(m)),
        }
    }

    /// Checks the structural requirements of the kind against q.
    pub fn check(&self, q: u32) -> Result<()> {
        match self {
            OracleKind::PermQuotient { s, r, base } => {
                if s.degree() != r.degree() || *base >= s.degree() {
                    return Err(Error::InvalidInput("permutations must share a degree containing the base".into()));
                }
                if !s.pow(2).is_identity() {
                    return Err(Error::InvalidInput("the image of S must be an involution".into()));
                }
                if !r.pow(q as i64).is_identity() {
                    return Err(Error::InvalidInput(format!("the image of R must have order dividing {q}")));
                }
                Ok(())
            }
            OracleKind::EntryCongruence { n, .. } if *n == 0 => Err(Error::InvalidInput("modulus must be positive".into())),
            OracleKind::ExponentHom { n, s_img, r_img } => {
                if *n == 0 || (2 * s_img) % n != 0 || (q as u64 * r_img) % n != 0 {
                    return Err(Error::InvalidInput(format!(
                        "S -> {s_img}, R -> {r_img} is not a homomorphism to Z/{n}"
                    )));
                }
                Ok(())
            }
            OracleKind::Conjugate { inner, h } => {
                if h.ctx().q() != q {
                    return Err(Error::ContextMismatch);
                }
                inner.check(q)
            }
            OracleKind::Intersection(parts) => parts.iter().try_for_each(|p| p.check(q)),
            _ => Ok(()),
        }
    }

    /// Index of the subgroup when it is known without building a polygon.
    pub fn known_index(&self) -> Option<usize> {
        match self {
            OracleKind::PermQuotient { s, r, base } => Some(orbit(&[s.clone(), r.clone()], *base).len()),
            _ => None,
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |x: &Perm| x.cycle_string(|i| (i + 1).to_string());
        match self {
            OracleKind::PermQuotient { s, r, base } => write!(f, "perm:s={};r={};base={}", p(s), p(r), base + 1),
            OracleKind::EntryCongruence { n, shape } => {
                let sh = match shape {
                    CongruenceShape::Principal => "principal",
                    CongruenceShape::UpperZero => "upper0",
                    CongruenceShape::LowerZero => "lower0",
                };
                write!(f, "cong:n={n};shape={sh}")
            }
            OracleKind::ExponentHom { n, s_img, r_img } => write!(f, "hom:n={n};s={s_img};r={r_img}"),
            OracleKind::Abelianization => f.write_str("commutator"),
            OracleKind::Conjugate { inner, h } => write!(f, "{inner} @ {h}"),
            OracleKind::Intersection(parts) => {
                let s: Vec<String> = parts.iter().map(|x| x.to_string()).collect();
                f.write_str(&s.join(" & "))
            }
        }
    }
}

/// A memoizing oracle bound to one q.
pub struct MembershipOracle {
    ctx: Ctx,
    kind: OracleKind,
    memo: Mutex<HashMap<Matrix2, bool>>,
}

impl MembershipOracle {
    pub fn new(ctx: &Ctx, kind: OracleKind) -> Result<MembershipOracle> {
        kind.check(ctx.q())?;
        Ok(MembershipOracle { ctx: ctx.clone(), kind, memo: Mutex::new(HashMap::new()) })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn contains(&self, m: &Matrix2) -> bool {
        if let Some(&v) = self.memo.lock().expect("memo poisoned").get(m) {
            return v;
        }
        let v = self.kind.contains(m);
        self.memo.lock().expect("memo poisoned").insert(m.clone(), v);
        v
    }

    /// Number of distinct matrices queried so far.
    pub fn queries(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }
}

/// Coset-action oracle read off a symbol's triangles.
pub fn oracle_from_symbol(sym: &FareySymbol) -> Result<MembershipOracle> {
    let om = Omega::of(sym)?;
    MembershipOracle::new(sym.ctx(), OracleKind::PermQuotient { s: om.f_s, r: om.f_r, base: om.base })
}

/// `key=value` parameters of one oracle specification.
pub struct Params<'a> {
    spec: &'a str,
    map: HashMap<String, String>,
}

impl Params<'_> {
    fn parse<'s>(spec: &'s str, body: &str) -> Result<Params<'s>> {
        let mut map = HashMap::new();
        let bytes: Vec<char> = body.chars().collect();
        // Split on ',' or ';' only where a new `key=` starts, so values may contain commas.
        let mut starts = vec![0usize];
        for (i, &c) in bytes.iter().enumerate() {
            if c == ',' || c == ';' {
                let rest: String = bytes[i + 1..].iter().collect();
                let key: String = rest.trim_start().chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
                if !key.is_empty() && rest.trim_start()[key.len()..].starts_with('=') {
                    starts.push(i + 1);
                }
            }
        }
        starts.push(bytes.len() + 1);
        for w in starts.windows(2) {
            let end = w[1] - 1;
            let piece: String = bytes[w[0]..end.min(bytes.len())].iter().collect();
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (k, v) = piece
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in oracle spec '{spec}'")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params { spec, map })
    }

    pub fn get(&self, k: &str) -> Result<&str> {
        self.map
            .get(k)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Parse(format!("oracle spec '{}' is missing '{k}'", self.spec)))
    }

    pub fn opt(&self, k: &str) -> Option<&str> {
        self.map.get(k).map(|s| s.as_str())
    }

    pub fn num(&self, k: &str) -> Result<u64> {
        self.get(k)?
            .parse()
            .map_err(|_| Error::Parse(format!("'{k}' must be a non-negative integer in '{}'", self.spec)))
    }
}

type Constructor = fn(&Ctx, &Params) -> Result<OracleKind>;

/// Oracle kinds registered by name.
pub struct OracleRegistry {
    entries: Vec<(&'static str, &'static str, Constructor)>,
}

impl Default for OracleRegistry {
    fn default() -> Self {
        let mut r = OracleRegistry { entries: Vec::new() };
        r.register("perm", "perm:s=<cycles>;r=<cycles>;base=<point>", |_, p| {
            let s = Perm::parse(p.get("s")?, None)?;
            let r = Perm::parse(p.get("r")?, None)?;
            let n = s.degree().max(r.degree());
            let s = Perm::parse(p.get("s")?, Some(n))?;
            let r = Perm::parse(p.get("r")?, Some(n))?;
            let base = p.opt("base").map_or(Ok(1), |b| b.parse::<usize>()).map_err(|_| Error::Parse("bad base".into()))?;
            if base == 0 || base > n {
                return Err(Error::InvalidInput(format!("base point {base} is outside 1..={n}")));
            }
            Ok(OracleKind::PermQuotient { s, r, base: base - 1 })
        });
        r.register("cong", "cong:n=<modulus>;shape=principal|upper0|lower0", |_, p| {
            let shape = match p.opt("shape").unwrap_or("principal") {
                "principal" => CongruenceShape::Principal,
                "upper0" => CongruenceShape::UpperZero,
                "lower0" => CongruenceShape::LowerZero,
                other => return Err(Error::Parse(format!("unknown congruence shape '{other}'"))),
            };
            Ok(OracleKind::EntryCongruence { n: p.num("n")?, shape })
        });
        r.register("hom", "hom:n=<order>;s=<image of S>;r=<image of R>", |_, p| {
            Ok(OracleKind::ExponentHom { n: p.num("n")?, s_img: p.num("s")?, r_img: p.num("r")? })
        });
        r.register("power", "power:r=<odd divisor of q>", |ctx, p| {
            let r = p.num("r")?;
            if r <= 1 || r % 2 == 0 || ctx.q() as u64 % r != 0 {
                return Err(Error::InvalidInput(format!("power needs an odd divisor r > 1 of q, got {r}")));
            }
            Ok(OracleKind::ExponentHom { n: r, s_img: 0, r_img: 1 })
        });
        r.register("commutator", "commutator", |_, _| Ok(OracleKind::Abelianization));
        r.register("builtin", "builtin:family=<family>", |ctx, p| {
            let sym = builtins::builtin(ctx.q(), p.get("family")?)?;
            Ok(oracle_from_symbol(&sym)?.kind)
        });
        r.register("fixture", "fixture:name=<fixture>", |ctx, p| {
            let sym = builtins::fixture(p.get("name")?)?;
            if sym.q() != ctx.q() {
                return Err(Error::InvalidInput(format!("fixture has q={}, not {}", sym.q(), ctx.q())));
            }
            Ok(oracle_from_symbol(&sym)?.kind)
        });
        r
    }
}

impl OracleRegistry {
    pub fn register(&mut self, name: &'static str, usage: &'static str, ctor: Constructor) {
        self.entries.retain(|(n, _, _)| *n != name);
        self.entries.push((name, usage, ctor));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _, _)| *n).collect()
    }

    pub fn usage(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(_, u, _)| *u).collect()
    }

    /// Parses `spec & spec & …`, where each part is `name:params` optionally
    /// followed by `@ <matrix>` for the conjugate `h X h⁻¹`.
    pub fn parse(&self, ctx: &Ctx, spec: &str) -> Result<OracleKind> {
        let parts: Vec<&str> = spec.split('&').map(|s| s.trim()).collect();
        let mut kinds = Vec::new();
        for part in parts {
            if part.is_empty() {
                return Err(Error::Parse(format!("empty oracle in '{spec}'")));
            }
            let (base, conj) = match part.split_once('@') {
                Some((b, h)) => (b.trim(), Some(Matrix2::parse(ctx, h.trim())?)),
                None => (part, None),
            };
            let (name, body) = base.split_once(':').unwrap_or((base, ""));
            let ctor = self
                .entries
                .iter()
                .find(|(n, _, _)| *n == name.trim())
                .map(|(_, _, c)| *c)
                .ok_or_else(|| Error::Parse(format!("unknown oracle '{name}'; known: {}", self.names().join(", "))))?;
            let params = Params::parse(base, body)?;
            let mut kind = ctor(ctx, &params)?;
            if let Some(h) = conj {
                kind = OracleKind::Conjugate { inner: Box::new(kind), h };
            }
            kinds.push(kind);
        }
        let kind = if kinds.len() == 1 { kinds.pop().unwrap() } else { OracleKind::Intersection(kinds) };
        kind.check(ctx.q())?;
        Ok(kind)
    }

    pub fn build(&self, ctx: &Ctx, spec: &str) -> Result<MembershipOracle> {
        MembershipOracle::new(ctx, self.parse(ctx, spec)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_context;
    use crate::builtins::{fixture, FIXTURES};

    #[test]
    fn symbol_oracle_accepts_generators() {
        for (name, _) in FIXTURES {
            let sym = fixture(name).unwrap();
            let o = oracle_from_symbol(&sym).unwrap();
            for g in sym.generators().unwrap() {
                assert!(o.contains(&g), "{name}: generator {g} rejected");
            }
            assert!(o.contains(&Matrix2::identity(sym.ctx())));
        }
    }

    #[test]
    fn registry_parsing() {
        let c6 = make_context(6).unwrap();
        let reg = OracleRegistry::default();
        let o = reg.build(&c6, "cong:n=2;shape=upper0").unwrap();
        assert!(o.contains(&Matrix2::r(&c6).pow(3)));
        assert!(!o.contains(&Matrix2::s(&c6)));
        let p = reg.parse(&c6, "perm:s=(1 2)(3 4),r=(1 2 3);base=1").unwrap();
        assert!(matches!(p, OracleKind::PermQuotient { ref s, .. } if s.degree() == 4));
        assert!(reg.parse(&c6, "nope").is_err());
        assert!(reg.parse(&c6, "cong:n=2 & commutator").is_ok());
        assert!(reg.parse(&c6, "commutator @ [[0,1],[-1,0]]").is_ok());
        assert!(reg.parse(&c6, "power:r=2").is_err());
    }
}
