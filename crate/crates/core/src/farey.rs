//! Hecke-Farey symbols: an increasing cusp sequence from -∞ to +∞ with a
//! side-pairing label on every consecutive pair.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::algebra::{make_context, Ctx};
use crate::error::{Error, Result};
use crate::moebius::{act, depth_one_cusps, frame, is_member, Cusp, Matrix2};

/// Side pairing attached to the interval between two consecutive cusps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntervalLabel {
    /// Self-paired even line, pairing conjugate to S.
    Even,
    /// A special triangle glued on, pairing conjugate to R.
    Odd,
    /// Paired with the other interval carrying the same tag.
    Free(u32),
    /// An r-cluster `gΦ_r` with pairing `g R^r g⁻¹`; requires `1 < r < q` and `r | q`.
    Cluster { r: u32, g: Matrix2 },
}

impl IntervalLabel {
    pub fn is_ordinary(&self) -> bool {
        !matches!(self, IntervalLabel::Cluster { .. })
    }
}

impl fmt::Display for IntervalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalLabel::Even => f.write_str("[o]"),
            IntervalLabel::Odd => f.write_str("[*]"),
            IntervalLabel::Free(t) => write!(f, "[{t}]"),
            IntervalLabel::Cluster { r, g } => write!(f, "[e{r}:g={g}]"),
        }
    }
}

/// One problem found by [`FareySymbol::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub interval: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.interval {
            Some(i) => write!(f, "interval {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A Hecke-Farey symbol.
///
/// `cusps[0]` is -∞ and the last cusp is +∞; `labels[i]` sits between
/// `cusps[i]` and `cusps[i + 1]`. Free tags are renumbered 1, 2, … in order
/// of first appearance on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareySymbol {
    ctx: Ctx,
    cusps: Vec<Cusp>,
    labels: Vec<IntervalLabel>,
}

impl FareySymbol {
    /// Assembles a symbol without validating it.
    pub fn new(ctx: &Ctx, cusps: Vec<Cusp>, labels: Vec<IntervalLabel>) -> Result<FareySymbol> {
        if cusps.len() < 2 || labels.len() + 1 != cusps.len() {
            return Err(Error::InvalidInput(format!(
                "a symbol needs n+1 cusps for n labels, got {} cusps and {} labels",
                cusps.len(),
                labels.len()
            )));
        }
        let mut renum: HashMap<u32, u32> = HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| match l {
                IntervalLabel::Free(t) => {
                    let next = renum.len() as u32 + 1;
                    IntervalLabel::Free(*renum.entry(t).or_insert(next))
                }
                other => other,
            })
            .collect();
        Ok(FareySymbol { ctx: ctx.clone(), cusps, labels })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn q(&self) -> u32 {
        self.ctx.q()
    }

    pub fn cusps(&self) -> &[Cusp] {
        &self.cusps
    }

    pub fn labels(&self) -> &[IntervalLabel] {
        &self.labels
    }

    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of the other interval with the same free tag.
    pub fn free_partner(&self, i: usize) -> Option<usize> {
        let IntervalLabel::Free(t) = self.labels[i] else { return None };
        self.labels
            .iter()
            .enumerate()
            .find(|&(j, l)| j != i && *l == IntervalLabel::Free(t))
            .map(|(j, _)| j)
    }

    /// Position of a cusp on the boundary circle: both infinities are 0 and
    /// the finite cusp `cusps[k]` is k.
    pub fn position(&self, k: usize) -> usize {
        if k == self.cusps.len() - 1 {
            0
        } else {
            k
        }
    }

    /// Number of distinct boundary points (the infinities count once).
    pub fn num_points(&self) -> usize {
        self.cusps.len() - 1
    }

    /// Frame of interval i: the matrix sending 0 to `cusps[i]` and ∞ to `cusps[i+1]`.
    pub fn interval_frame(&self, i: usize) -> Result<Matrix2> {
        frame(&self.cusps[i], &self.cusps[i + 1])
    }

    /// The side-pairing element of interval `i`.
    pub fn pairing_matrix(&self, i: usize) -> Result<Matrix2> {
        let ctx = &self.ctx;
        match &self.labels[i] {
            IntervalLabel::Even => Ok(self.interval_frame(i)?.conj(&Matrix2::s(ctx))),
            IntervalLabel::Odd => Ok(self.interval_frame(i)?.conj(&Matrix2::r(ctx))),
            IntervalLabel::Cluster { r, g } => Ok(g.conj(&Matrix2::r(ctx).pow(*r as i64))),
            IntervalLabel::Free(_) => {
                let j = self
                    .free_partner(i)
                    .ok_or_else(|| Error::CorruptSymbol(format!("free tag on interval {i} has no partner")))?;
                let ai = self.interval_frame(i)?;
                let (xj, xj1) = (&self.cusps[j], &self.cusps[j + 1]);
                let m = Matrix2::new(xj.num().clone(), xj.den().clone(), -xj1.num(), -xj1.den())
                    .map_err(|_| Error::CorruptSymbol(format!("interval {j} is not an even line")))?;
                Ok(&m * &ai.inverse())
            }
        }
    }

    /// One generator per side pairing, with the interval it comes from. A
    /// free pair contributes the matrix of its first interval.
    pub fn generators_with_intervals(&self) -> Result<Vec<(usize, Matrix2)>> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if let IntervalLabel::Free(_) = self.labels[i] {
                if matches!(self.free_partner(i), Some(j) if j < i) {
                    continue;
                }
            }
            out.push((i, self.pairing_matrix(i)?));
        }
        Ok(out)
    }

    pub fn generators(&self) -> Result<Vec<Matrix2>> {
        Ok(self.generators_with_intervals()?.into_iter().map(|(_, m)| m).collect())
    }

    /// Label census: (even, odd, free pairs, cluster sizes).
    pub fn census(&self) -> (usize, usize, usize, Vec<u32>) {
        let mut even = 0;
        let mut odd = 0;
        let mut free = 0;
        let mut clusters = Vec::new();
        for l in &self.labels {
            match l {
                IntervalLabel::Even => even += 1,
                IntervalLabel::Odd => odd += 1,
                IntervalLabel::Free(_) => free += 1,
                IntervalLabel::Cluster { r, .. } => clusters.push(*r),
            }
        }
        (even, odd, free / 2, clusters)
    }

    /// Number of q-gons in the polygon.
    pub fn qgon_count(&self) -> Result<usize> {
        let q = self.q() as i64;
        let ordinary = self.labels.iter().filter(|l| l.is_ordinary()).count() as i64;
        let (_, _, _, clusters) = self.census();
        let excess: i64 = clusters.iter().map(|&r| r as i64 - 2).sum();
        let num = ordinary - 2 - excess;
        if num < 0 || num % (q - 2) != 0 {
            return Err(Error::CorruptSymbol(format!(
                "boundary count {ordinary} does not match any number of q-gons"
            )));
        }
        Ok((num / (q - 2)) as usize)
    }

    /// Index in G_q, which is the number of special triangles in the polygon.
    pub fn index(&self) -> Result<usize> {
        let n0 = self.qgon_count()?;
        let (_, odd, _, clusters) = self.census();
        let d = n0 * self.q() as usize + clusters.iter().map(|&r| r as usize).sum::<usize>() + odd;
        if d == 0 {
            return Err(Error::CorruptSymbol("symbol has no triangles".into()));
        }
        Ok(d)
    }

    /// Classes of boundary points under the side pairings, as a map from
    /// position to class id (class ids are 0, 1, … by first appearance).
    pub fn cusp_classes(&self) -> Vec<usize> {
        let n = self.num_points();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra.max(rb)] = ra.min(rb);
            }
        };
        for i in 0..self.len() {
            let (a, b) = (self.position(i), self.position(i + 1));
            match &self.labels[i] {
                IntervalLabel::Free(_) => {
                    if let Some(j) = self.free_partner(i) {
                        if i < j {
                            let (c, d) = (self.position(j), self.position(j + 1));
                            union(&mut parent, d, a);
                            union(&mut parent, c, b);
                        }
                    }
                }
                _ => union(&mut parent, a, b),
            }
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        (0..n)
            .map(|x| {
                let r = find(&mut parent, x);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect()
    }

    /// Number of cusp classes of the quotient surface.
    pub fn cusp_class_count(&self) -> usize {
        self.cusp_classes().iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Checks every structural condition and reports all failures.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |interval: Option<usize>, message: String| out.push(Violation { interval, message });
        let n = self.cusps.len();
        if !self.cusps[0].is_neg_infinity() {
            bad(None, "first cusp must be -inf".into());
        }
        if !self.cusps[n - 1].is_pos_infinity() {
            bad(None, "last cusp must be inf".into());
        }
        if !self.cusps.iter().any(|c| c.is_zero()) {
            bad(None, "0 must be one of the cusps".into());
        }
        for (k, c) in self.cusps.iter().enumerate() {
            if c.ctx().q() != self.q() {
                bad(None, format!("cusp {k} belongs to a different q"));
            } else if k > 0 && k < n - 1 && (c.is_infinite() || !c.is_reduced()) {
                bad(None, format!("cusp {k} ({c}) is not in reduced form"));
            }
        }
        for i in 0..self.len() {
            if self.cusps[i].compare(&self.cusps[i + 1]) != std::cmp::Ordering::Less {
                bad(Some(i), "cusps are not strictly increasing".into());
            }
        }
        let mut tags: BTreeMap<u32, usize> = BTreeMap::new();
        let v = depth_one_cusps(&self.ctx);
        let q = self.q();
        for (i, l) in self.labels.iter().enumerate() {
            match l {
                IntervalLabel::Cluster { r, g } => {
                    if *r <= 1 || *r >= q || q % r != 0 {
                        bad(Some(i), format!("cluster size {r} must be a proper divisor of q greater than 1"));
                        continue;
                    }
                    if g.ctx().q() != q || !is_member(g) {
                        bad(Some(i), format!("cluster matrix {g} is not in G_q"));
                        continue;
                    }
                    let left = act(g, &v[*r as usize - 1]);
                    let right = act(g, &v[q as usize - 1]);
                    if left.point() != self.cusps[i].point() || right.point() != self.cusps[i + 1].point() {
                        bad(Some(i), format!("cluster matrix does not carry (v_{r}, v_q) onto the interval"));
                    }
                }
                _ => {
                    if !self.cusps[i].det_with(&self.cusps[i + 1]).is_one() {
                        bad(Some(i), "ordinary interval is not an even line".into());
                    }
                    if let IntervalLabel::Free(t) = l {
                        *tags.entry(*t).or_default() += 1;
                    }
                }
            }
        }
        for (t, c) in tags {
            if c != 2 {
                bad(None, format!("free tag {t} occurs {c} time(s), expected 2"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        match self.generators() {
            Ok(gens) => {
                let mut distinct: Vec<&Matrix2> = Vec::new();
                for g in &gens {
                    if !distinct.contains(&g) {
                        distinct.push(g);
                    }
                }
                if distinct.len() < 2 {
                    out.push(Violation { interval: None, message: "fewer than two distinct side pairings".into() });
                }
            }
            Err(e) => out.push(Violation { interval: None, message: e.to_string() }),
        }
        if out.is_empty() {
            if let Err(e) = crate::permrep::Omega::of(self) {
                out.push(Violation { interval: None, message: e.to_string() });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Validates, turning violations into a `CorruptSymbol` error.
    pub fn checked(self) -> Result<FareySymbol> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::CorruptSymbol(msgs.join("; ")))
        }
    }

    /// Parses the text form `q=6: -inf [o] 0/1 [*] inf`.
    pub fn parse(text: &str) -> Result<FareySymbol> {
        let text = text.trim();
        let (head, body) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse("symbol must start with 'q=<n>:'".into()))?;
        let q: u32 = head
            .trim()
            .strip_prefix("q=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad symbol header '{head}'")))?;
        let ctx = make_context(q).map_err(|e| Error::Parse(e.to_string()))?;
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() % 2 == 0 {
            return Err(Error::Parse("symbol must alternate cusps and labels".into()));
        }
        let mut cusps = Vec::new();
        let mut labels = Vec::new();
        for (k, tok) in toks.iter().enumerate() {
            if k % 2 == 0 {
                cusps.push(Cusp::parse(&ctx, tok)?);
            } else {
                labels.push(parse_label(&ctx, tok)?);
            }
        }
        FareySymbol::new(&ctx, cusps, labels)
    }

    pub fn to_json(&self) -> Value {
        let labels: Vec<Value> = self
            .labels
            .iter()
            .map(|l| match l {
                IntervalLabel::Even => json!({"kind": "even"}),
                IntervalLabel::Odd => json!({"kind": "odd"}),
                IntervalLabel::Free(t) => json!({"kind": "free", "tag": t}),
                IntervalLabel::Cluster { r, g } => json!({"kind": "cluster", "r": r, "g": g.to_json()}),
            })
            .collect();
        json!({
            "q": self.q(),
            "cusps": self.cusps.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "labels": labels,
        })
    }

    pub fn from_json(v: &Value) -> Result<FareySymbol> {
        let q = v
            .get("q")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Parse("symbol JSON needs integer 'q'".into()))?;
        let ctx = make_context(q as u32).map_err(|e| Error::Parse(e.to_string()))?;
        let arr = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_array())
                .ok_or_else(|| Error::Parse(format!("symbol JSON needs array '{k}'")))
        };
        let cusps = arr("cusps")?.iter().map(|c| Cusp::from_json(&ctx, c)).collect::<Result<Vec<_>>>()?;
        let labels = arr("labels")?
            .iter()
            .map(|l| {
                let kind = l.get("kind").and_then(|k| k.as_str()).unwrap_or("");
                let num = |k: &str| {
                    l.get(k)
                        .and_then(|x| x.as_u64())
                        .map(|x| x as u32)
                        .ok_or_else(|| Error::Parse(format!("label needs integer '{k}'")))
                };
                match kind {
                    "even" => Ok(IntervalLabel::Even),
                    "odd" => Ok(IntervalLabel::Odd),
                    "free" => Ok(IntervalLabel::Free(num("tag")?)),
                    "cluster" => {
                        let g = l.get("g").ok_or_else(|| Error::Parse("cluster label needs 'g'".into()))?;
                        Ok(IntervalLabel::Cluster { r: num("r")?, g: Matrix2::from_json(&ctx, g)? })
                    }
                    other => Err(Error::Parse(format!("unknown label kind '{other}'"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FareySymbol::new(&ctx, cusps, labels)
    }
}

fn parse_label(ctx: &Ctx, tok: &str) -> Result<IntervalLabel> {
    let inner = tok
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("label must be bracketed: '{tok}'")))?;
    match inner {
        "o" => return Ok(IntervalLabel::Even),
        "*" => return Ok(IntervalLabel::Odd),
        _ => {}
    }
    if let Ok(t) = inner.parse::<u32>() {
        return Ok(IntervalLabel::Free(t));
    }
    let rest = inner.strip_prefix('e').ok_or_else(|| Error::Parse(format!("unknown label '{tok}'")))?;
    let (r, g) = rest
        .split_once(":g=")
        .ok_or_else(|| Error::Parse(format!("cluster label must look like [er:g=M]: '{tok}'")))?;
    let r: u32 = r.parse().map_err(|_| Error::Parse(format!("bad cluster size in '{tok}'")))?;
    let g = if g == "I" { Matrix2::identity(ctx) } else { Matrix2::parse(ctx, g)? };
    if r == 1 {
        return Ok(IntervalLabel::Odd);
    }
    Ok(IntervalLabel::Cluster { r, g })
}

impl fmt::Display for FareySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={}:", self.q())?;
        for (i, c) in self.cusps.iter().enumerate() {
            write!(f, " {c}")?;
            if i < self.labels.len() {
                write!(f, " {}", self.labels[i])?;
            }
        }
        Ok(())
    }
}
