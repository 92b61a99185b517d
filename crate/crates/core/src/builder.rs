//! Construction of a special polygon from a membership oracle.
//!
//! Sides are kept in creation order and processed first-in first-out, so the
//! output depends only on the oracle.

use crate::algebra::Ctx;
use crate::error::{Error, Result};
use crate::farey::{FareySymbol, IntervalLabel};
use crate::moebius::{act, depth_one_cusps, frame, qgon_cusps, Cusp, Matrix2};
use crate::oracle::MembershipOracle;

/// Proper divisors of q greater than one, ascending.
pub fn cluster_sizes(q: u32) -> Vec<u32> {
    (2..q).filter(|d| q % d == 0).collect()
}

#[derive(Clone, Debug)]
struct Side {
    id: u64,
    label: Option<IntervalLabel>,
}

/// Partial polygon: a cusp list from -∞ to ∞ and one side per gap.
struct BuildState<'a> {
    ctx: Ctx,
    oracle: &'a MembershipOracle,
    cusps: Vec<Cusp>,
    sides: Vec<Side>,
    next_id: u64,
    next_tag: u32,
    triangles: usize,
    budget: usize,
    log: Vec<String>,
}

impl<'a> BuildState<'a> {
    fn new(oracle: &'a MembershipOracle, budget: usize) -> Self {
        BuildState {
            ctx: oracle.ctx().clone(),
            oracle,
            cusps: Vec::new(),
            sides: Vec::new(),
            next_id: 0,
            next_tag: 1,
            triangles: 0,
            budget,
            log: Vec::new(),
        }
    }

    fn fresh(&mut self, label: Option<IntervalLabel>) -> Side {
        self.next_id += 1;
        Side { id: self.next_id, label }
    }

    fn add_triangles(&mut self, n: usize) -> Result<()> {
        self.triangles += n;
        if self.triangles > self.budget {
            return Err(Error::TileBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn at(&self, id: u64) -> Option<usize> {
        self.sides.iter().position(|s| s.id == id)
    }

    fn side_frame(&self, i: usize) -> Result<Matrix2> {
        frame(&self.cusps[i], &self.cusps[i + 1])
    }

    /// Matrix carrying side `i` onto side `j` with reversed orientation.
    fn free_matrix(&self, i: usize, j: usize) -> Result<Matrix2> {
        let (xj, xj1) = (&self.cusps[j], &self.cusps[j + 1]);
        let m = Matrix2::new(xj.num().clone(), xj.den().clone(), -xj1.num(), -xj1.den())?;
        Ok(&m * &self.side_frame(i)?.inverse())
    }

    fn unpaired_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.sides.iter().filter(|s| s.label.is_none()).map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Replaces side `i` by the sides through `inner`, all unpaired except
    /// that the last one gets `last`. Returns the ids of the new unpaired sides.
    fn split(&mut self, i: usize, inner: &[Cusp], last: Option<IntervalLabel>) -> Vec<u64> {
        let n = inner.len() + 1;
        let mut new_sides: Vec<Side> = (0..n).map(|_| self.fresh(None)).collect();
        new_sides[n - 1].label = last;
        let ids = new_sides.iter().filter(|s| s.label.is_none()).map(|s| s.id).collect();
        self.cusps.splice(i + 1..i + 1, inner.iter().cloned());
        self.sides.splice(i..i + 1, new_sides);
        ids
    }

    /// Tries to pair the side with the given id.
    fn classify(&mut self, id: u64) -> Result<()> {
        let Some(i) = self.at(id) else { return Ok(()) };
        if self.sides[i].label.is_some() {
            return Ok(());
        }
        for other in self.unpaired_ids() {
            if other == id {
                continue;
            }
            let j = self.at(other).expect("unpaired id is live");
            if self.oracle.contains(&self.free_matrix(i, j)?) {
                let tag = self.next_tag;
                self.next_tag += 1;
                self.sides[i].label = Some(IntervalLabel::Free(tag));
                self.sides[j].label = Some(IntervalLabel::Free(tag));
                self.log.push(format!("pair ({}, {}) with ({}, {})", self.cusps[i], self.cusps[i + 1], self.cusps[j], self.cusps[j + 1]));
                return Ok(());
            }
        }
        let a = self.side_frame(i)?;
        if self.oracle.contains(&a.conj(&Matrix2::s(&self.ctx))) {
            self.sides[i].label = Some(IntervalLabel::Even);
            self.log.push(format!("even side ({}, {})", self.cusps[i], self.cusps[i + 1]));
            return Ok(());
        }
        let r = Matrix2::r(&self.ctx);
        if self.oracle.contains(&a.conj(&r)) {
            self.add_triangles(1)?;
            self.sides[i].label = Some(IntervalLabel::Odd);
            self.log.push(format!("odd triangle on ({}, {})", self.cusps[i], self.cusps[i + 1]));
            return Ok(());
        }
        for d in cluster_sizes(self.ctx.q()) {
            if self.oracle.contains(&a.conj(&r.pow(d as i64))) {
                self.add_triangles(d as usize)?;
                let c = qgon_cusps(&self.cusps[i], &self.cusps[i + 1])?;
                self.log.push(format!("{d}-cluster on ({}, {})", self.cusps[i], self.cusps[i + 1]));
                let ids = self.split(i, &c[1..d as usize], Some(IntervalLabel::Cluster { r: d, g: a }));
                for nid in ids {
                    self.classify(nid)?;
                }
                return Ok(());
            }
        }
        Ok(())
    }

    /// Attaches a q-gon along side `i` and classifies its new sides.
    fn attach_qgon(&mut self, i: usize) -> Result<()> {
        let q = self.ctx.q() as usize;
        self.add_triangles(q)?;
        let c = qgon_cusps(&self.cusps[i], &self.cusps[i + 1])?;
        self.log.push(format!("q-gon on ({}, {})", self.cusps[i], self.cusps[i + 1]));
        let ids = self.split(i, &c[1..q - 1], None);
        for id in ids {
            self.classify(id)?;
        }
        Ok(())
    }

    fn seed(&mut self, cusps: Vec<Cusp>, labels: Vec<Option<IntervalLabel>>, triangles: usize) -> Result<()> {
        self.cusps = cusps;
        self.sides = labels.into_iter().map(|l| self.fresh(l)).collect();
        self.add_triangles(triangles)
    }

    /// Step (B): the smallest starting tile around the side (0, ∞).
    fn initial_tile(&mut self) -> Result<()> {
        let ctx = self.ctx.clone();
        let q = ctx.q();
        let v = depth_one_cusps(&ctx);
        let (ninf, zero, inf) = (Cusp::neg_infinity(&ctx), Cusp::zero(&ctx), Cusp::infinity(&ctx));
        let r = Matrix2::r(&ctx);
        let s = Matrix2::s(&ctx);
        if self.oracle.contains(&r) {
            self.log.push("start with the odd triangle on (0, inf)".into());
            return self.seed(vec![ninf, zero, inf], vec![None, Some(IntervalLabel::Odd)], 1);
        }
        if self.oracle.contains(&s.conj(&r)) {
            self.log.push("start with the odd triangle on (-inf, 0)".into());
            return self.seed(vec![ninf, zero, inf], vec![Some(IntervalLabel::Odd), None], 1);
        }
        let a = Matrix2::a_gen(&ctx);
        for d in cluster_sizes(q) {
            let du = d as usize;
            if self.oracle.contains(&r.pow(d as i64)) {
                self.log.push(format!("start with the {d}-cluster to the right of 0"));
                let mut cusps = vec![ninf];
                cusps.extend(v[..du].iter().cloned());
                cusps.push(inf);
                let mut labels = vec![None; du];
                labels.push(Some(IntervalLabel::Cluster { r: d, g: Matrix2::identity(&ctx) }));
                return self.seed(cusps, labels, du);
            }
            let h = &a.pow(1 - d as i64) * &s;
            if self.oracle.contains(&h.conj(&r.pow(d as i64))) {
                // Tile points h·v_q, h·v_1, …, h·v_{d-1} = 0, with h·v_d at infinity.
                let mut pts = vec![act(&h, &v[q as usize - 1])];
                pts.extend(v[..du - 1].iter().map(|c| act(&h, c)));
                if !act(&h, &v[du - 1]).is_infinite() || !pts[du - 1].is_zero() {
                    continue;
                }
                self.log.push(format!("start with the {d}-cluster to the left of 0"));
                let mut cusps = vec![ninf];
                cusps.extend(pts);
                cusps.push(inf);
                let mut labels = vec![Some(IntervalLabel::Cluster { r: d, g: h })];
                labels.extend(std::iter::repeat(None).take(du));
                return self.seed(cusps, labels, du);
            }
        }
        self.log.push("start with the depth-one q-gon".into());
        let mut cusps = vec![ninf];
        cusps.extend(v[..q as usize - 1].iter().cloned());
        cusps.push(inf);
        self.seed(cusps, vec![None; q as usize], q as usize)
    }

    fn run(&mut self) -> Result<FareySymbol> {
        self.initial_tile()?;
        for id in self.unpaired_ids() {
            self.classify(id)?;
        }
        while let Some(&id) = self.unpaired_ids().first() {
            let i = self.at(id).expect("unpaired id is live");
            self.attach_qgon(i)?;
        }
        let labels = self.sides.iter().map(|s| s.label.clone().expect("all sides paired")).collect();
        let sym = FareySymbol::new(&self.ctx, self.cusps.clone(), labels)?;
        let violations = sym.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::OracleInconsistent(msgs.join("; ")));
        }
        for (i, g) in sym.generators_with_intervals()? {
            if !self.oracle.kind().contains(&g) {
                return Err(Error::OracleInconsistent(format!("pairing of interval {i} was accepted and then refuted")));
            }
        }
        if sym.index()? != self.triangles {
            return Err(Error::OracleInconsistent(format!(
                "built {} triangles but the symbol has index {}",
                self.triangles,
                sym.index()?
            )));
        }
        Ok(sym)
    }
}

/// Result of a traced build.
#[derive(Clone, Debug)]
pub struct BuildReport {
    pub symbol: FareySymbol,
    /// One line per tile or pairing decision.
    pub log: Vec<String>,
    /// Distinct matrices the oracle was asked about.
    pub queries: usize,
}

/// Builds an admissible symbol for the subgroup decided by `oracle`, using
/// at most `max_tiles` special triangles.
pub fn build_polygon(oracle: &MembershipOracle, ctx: &Ctx, max_tiles: usize) -> Result<FareySymbol> {
    Ok(build_polygon_traced(oracle, ctx, max_tiles)?.symbol)
}

pub fn build_polygon_traced(oracle: &MembershipOracle, ctx: &Ctx, max_tiles: usize) -> Result<BuildReport> {
    if oracle.ctx() != ctx {
        return Err(Error::ContextMismatch);
    }
    let mut st = BuildState::new(oracle, max_tiles);
    let symbol = st.run()?;
    Ok(BuildReport { symbol, log: st.log, queries: oracle.queries() })
}
