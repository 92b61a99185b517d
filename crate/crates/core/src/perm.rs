//! Permutations on {0, …, n-1}, stabilizer chains and centralizers.
//!
//! Products read left to right: `p.then(&q)` applies `p` first.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_string(|i| (i + 1).to_string()))
    }
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u32).collect())
    }

    /// From one-line notation; fails unless `images` is a bijection.
    pub fn from_images(images: Vec<u32>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    /// From disjoint cycles over 0-based points.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut img: Vec<u32> = (0..n as u32).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (k, &x) in c.iter().enumerate() {
                if x >= n || used[x] {
                    return Err(Error::InvalidInput(format!("bad or repeated point {} in cycles", x + 1)));
                }
                used[x] = true;
                img[x] = c[(k + 1) % c.len()] as u32;
            }
        }
        Ok(Perm(img))
    }

    /// Parses 1-based cycle notation such as `(1 2)(3 4 5)`; commas are allowed.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Perm> {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text.trim();
        if rest.is_empty() || rest == "()" || rest == "id" {
            return Ok(Perm::identity(degree.unwrap_or(0)));
        }
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| Error::Parse(format!("expected '(' in '{text}'")))?;
            let close = open.find(')').ok_or_else(|| Error::Parse(format!("unclosed cycle in '{text}'")))?;
            let body = &open[..close];
            let mut cyc = Vec::new();
            for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                let v: usize = tok.parse().map_err(|_| Error::Parse(format!("bad point '{tok}'")))?;
                if v == 0 {
                    return Err(Error::Parse("points are numbered from 1".into()));
                }
                cyc.push(v - 1);
            }
            cycles.push(cyc);
            rest = open[close + 1..].trim_start();
        }
        let max = cycles.iter().flatten().map(|&x| x + 1).max().unwrap_or(0);
        let n = degree.unwrap_or(max).max(max);
        Perm::from_cycles(n, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self` followed by `o`.
    pub fn then(&self, o: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| o.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Perm::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            sq = sq.then(&sq);
            e >>= 1;
        }
        acc
    }

    /// Cycles including fixed points, each starting at its smallest point,
    /// ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.apply(s);
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.sort_unstable();
        t
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|&(i, &x)| i == x as usize).count()
    }

    pub fn order(&self) -> u64 {
        self.cycles().iter().fold(1u64, |acc, c| num_integer::lcm(acc, c.len() as u64))
    }

    /// Cycle notation using `label` for points.
    pub fn cycle_string(&self, label: impl Fn(usize) -> String) -> String {
        if self.degree() == 0 {
            return "()".into();
        }
        self.cycles()
            .iter()
            .map(|c| format!("({})", c.iter().map(|&x| label(x)).collect::<Vec<_>>().join(" ")))
            .collect()
    }

    /// `k⁻¹ · self · k`, i.e. the permutation obtained by renaming each point x to k(x).
    pub fn relabel(&self, k: &Perm) -> Perm {
        k.inverse().then(self).then(k)
    }
}

/// Points reachable from `start` under `gens`.
pub fn orbit(gens: &[Perm], start: usize) -> Vec<usize> {
    let n = gens.first().map_or(start + 1, |g| g.degree());
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut out = vec![start];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for g in gens {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out
}

pub fn is_transitive(gens: &[Perm], n: usize) -> bool {
    n == 0 || orbit(gens, 0).len() == n
}

struct Level {
    point: usize,
    /// `transversal[b]` maps `point` to `b`.
    transversal: Vec<Option<Perm>>,
    orbit: Vec<usize>,
    gens: Vec<Perm>,
}

/// A base and strong generating set built by the deterministic Schreier-Sims algorithm.
pub struct StabChain {
    n: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(gens: &[Perm], n: usize) -> StabChain {
        let mut strong: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut base: Vec<usize> = Vec::new();
        for g in &strong {
            if base.iter().all(|&b| g.apply(b) == b) {
                base.push((0..n).find(|&x| g.apply(x) != x).expect("non-identity moves a point"));
            }
        }
        'outer: loop {
            let chain = StabChain::levels_for(&strong, &base, n);
            for i in (0..chain.levels.len()).rev() {
                let lvl = &chain.levels[i];
                for &b in &lvl.orbit {
                    let ub = lvl.transversal[b].as_ref().unwrap();
                    for s in &lvl.gens {
                        let c = s.apply(b);
                        let uc = lvl.transversal[c].as_ref().unwrap();
                        let h = ub.then(s).then(&uc.inverse());
                        if h.is_identity() {
                            continue;
                        }
                        let (res, _) = chain.sift(h, i + 1);
                        if !res.is_identity() {
                            if base.iter().all(|&p| res.apply(p) == p) {
                                base.push((0..n).find(|&x| res.apply(x) != x).unwrap());
                            }
                            strong.push(res);
                            continue 'outer;
                        }
                    }
                }
            }
            return chain;
        }
    }

    fn levels_for(strong: &[Perm], base: &[usize], n: usize) -> StabChain {
        let mut levels = Vec::with_capacity(base.len());
        for (i, &point) in base.iter().enumerate() {
            let gens: Vec<Perm> =
                strong.iter().filter(|g| base[..i].iter().all(|&p| g.apply(p) == p)).cloned().collect();
            let mut transversal: Vec<Option<Perm>> = vec![None; n];
            transversal[point] = Some(Perm::identity(n));
            let mut orbit = vec![point];
            let mut k = 0;
            while k < orbit.len() {
                let x = orbit[k];
                for g in &gens {
                    let y = g.apply(x);
                    if transversal[y].is_none() {
                        transversal[y] = Some(transversal[x].as_ref().unwrap().then(g));
                        orbit.push(y);
                    }
                }
                k += 1;
            }
            levels.push(Level { point, transversal, orbit, gens });
        }
        StabChain { n, levels }
    }

    fn sift(&self, mut h: Perm, from: usize) -> (Perm, usize) {
        for k in from..self.levels.len() {
            let lvl = &self.levels[k];
            let c = h.apply(lvl.point);
            match &lvl.transversal[c] {
                None => return (h, k),
                Some(u) => h = h.then(&u.inverse()),
            }
        }
        (h, self.levels.len())
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.n && self.sift(g.clone(), 0).0.is_identity()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }
}

/// Order of the group generated by `gens` on `n` points.
pub fn group_order(gens: &[Perm], n: usize) -> BigUint {
    StabChain::new(gens, n).order()
}

/// The centralizer of a transitive group in the full symmetric group.
///
/// An element commuting with a transitive group is fixed by the image of one
/// point, so each candidate image of point 0 is propagated along the orbit
/// and kept if it closes up consistently.
pub fn centralizer(gens: &[Perm], n: usize) -> Result<Vec<Perm>> {
    if n == 0 {
        return Ok(vec![Perm::identity(0)]);
    }
    if !is_transitive(gens, n) {
        return Err(Error::NotTransitive);
    }
    // Spanning tree of the orbit of 0: (point, parent, generator index).
    let mut tree: Vec<(usize, usize, usize)> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (gi, g) in gens.iter().enumerate() {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                tree.push((y, x, gi));
                queue.push_back(y);
            }
        }
    }
    let mut out = Vec::new();
    'cand: for t in 0..n {
        let mut img = vec![usize::MAX; n];
        img[0] = t;
        for &(y, x, gi) in &tree {
            img[y] = gens[gi].apply(img[x]);
        }
        for x in 0..n {
            for g in gens {
                if img[g.apply(x)] != g.apply(img[x]) {
                    continue 'cand;
                }
            }
        }
        if let Ok(p) = Perm::from_images(img.into_iter().map(|v| v as u32).collect()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// A small generating set for a group given by its full element list.
pub fn generating_subset(elements: &[Perm], n: usize) -> Vec<Perm> {
    let mut gens: Vec<Perm> = Vec::new();
    for e in elements {
        if e.is_identity() {
            continue;
        }
        if gens.is_empty() || !StabChain::new(&gens, n).contains(e) {
            gens.push(e.clone());
        }
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let p = Perm::parse("(1 2 3)(4 5)", None).unwrap();
        assert_eq!(p.order(), 6);
        assert!(p.pow(6).is_identity());
        assert!(p.then(&p.inverse()).is_identity());
        assert_eq!(p.cycle_type(), vec![2, 3]);
        assert_eq!(format!("{p:?}"), "(1 2 3)(4 5)");
        assert!(Perm::parse("(1 2)(2 3)", None).is_err());
    }

    #[test]
    fn orders() {
        let s = |t: &str, n| Perm::parse(t, Some(n)).unwrap();
        assert_eq!(group_order(&[s("(1 2)", 5), s("(1 2 3 4 5)", 5)], 5), BigUint::from(120u32));
        assert_eq!(group_order(&[s("(1 2 3)", 5), s("(3 4 5)", 5)], 5), BigUint::from(60u32));
        let a11 = [s("(1 2 3)", 11), s("(1 2 3 4 5 6 7 8 9 10 11)", 11)];
        assert_eq!(group_order(&a11, 11), BigUint::from(19958400u32));
        assert_eq!(group_order(&[], 4), BigUint::one());
    }

    #[test]
    fn centralizer_of_regular_cyclic() {
        let r = Perm::parse("(1 2 3)", None).unwrap();
        let c = centralizer(&[Perm::identity(3), r], 3).unwrap();
        assert_eq!(c.len(), 3);
        assert!(matches!(centralizer(&[Perm::parse("(1 2)", Some(3)).unwrap()], 3), Err(Error::NotTransitive)));
    }
}
