//! The special triangles of a symbol's polygon and the permutations f(S),
//! f(R) they carry.
//!
//! Every special triangle is identified by a directed even line (u → w)
//! between two boundary points; the triangle across the same line has the
//! reversed direction. Tiles are q-gons, clusters and odd triangles, and the
//! polygon is recovered by walking outward from the clusters (or from one
//! q-gon) until every line ends on the boundary.

use std::cmp::Reverse;
use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::farey::{FareySymbol, IntervalLabel};
use crate::moebius::{act, depth_one_cusps, frame, Cusp, Letter, Word};
use crate::perm::{centralizer, group_order, Perm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TileKind {
    QGon,
    Cluster(u32),
    Odd,
}

#[derive(Clone, Debug)]
pub struct Tile {
    pub kind: TileKind,
    /// Triangle indices in rotation order.
    pub triangles: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineKind {
    /// Shared by two triangles (labels k and k~).
    Shared,
    /// Paired with itself by an order-2 element (single label k).
    SelfPaired,
}

#[derive(Clone, Debug)]
pub struct Line {
    pub kind: LineKind,
    /// Boundary positions of the endpoints (see [`FareySymbol::position`]).
    pub ends: (usize, usize),
    /// Unbarred triangle first.
    pub triangles: Vec<usize>,
}

/// The triangle set Ω of a symbol with its tiles, lines and permutations.
#[derive(Clone, Debug)]
pub struct Omega {
    /// Directed line of each triangle, as boundary positions.
    pub directed: Vec<(usize, usize)>,
    pub tiles: Vec<Tile>,
    pub lines: Vec<Line>,
    pub f_s: Perm,
    pub f_r: Perm,
    /// The triangle of the identity coset.
    pub base: usize,
    labels: Vec<String>,
}

struct Builder<'a> {
    sym: &'a FareySymbol,
    positions: HashMap<Cusp, usize>,
    directed: Vec<(usize, usize)>,
    by_line: HashMap<(usize, usize), usize>,
    tiles: Vec<Tile>,
    limit: usize,
}

impl Builder<'_> {
    fn pos(&self, c: &Cusp) -> Result<usize> {
        self.positions
            .get(&c.point())
            .copied()
            .ok_or_else(|| Error::CorruptSymbol(format!("tiling reaches cusp {c} outside the symbol")))
    }

    fn cusp(&self, p: usize) -> Cusp {
        let cs = self.sym.cusps();
        if p == 0 {
            Cusp::infinity(self.sym.ctx())
        } else {
            cs[p].clone()
        }
    }

    fn add_tile(&mut self, kind: TileKind, lines: Vec<(usize, usize)>) -> Result<usize> {
        let mut tris = Vec::with_capacity(lines.len());
        for l in lines {
            if self.by_line.contains_key(&l) {
                return Err(Error::CorruptSymbol(format!("tiles overlap along line {l:?}")));
            }
            let t = self.directed.len();
            self.directed.push(l);
            self.by_line.insert(l, t);
            tris.push(t);
        }
        if self.directed.len() > self.limit {
            return Err(Error::CorruptSymbol("tiling has more triangles than the index".into()));
        }
        self.tiles.push(Tile { kind, triangles: tris });
        Ok(self.tiles.len() - 1)
    }

    fn qgon(&mut self, u: usize, w: usize) -> Result<usize> {
        let f = frame(&self.cusp(u), &self.cusp(w))
            .map_err(|_| Error::CorruptSymbol("tiling crosses a non-even line".into()))?;
        let v = depth_one_cusps(self.sym.ctx());
        let pts = v.iter().map(|c| self.pos(&act(&f, c))).collect::<Result<Vec<_>>>()?;
        let q = pts.len();
        let lines = (0..q).map(|k| (pts[k], pts[(k + 1) % q])).collect();
        self.add_tile(TileKind::QGon, lines)
    }
}

impl Omega {
    pub fn of(sym: &FareySymbol) -> Result<Omega> {
        let index = sym.index()?;
        let cs = sym.cusps();
        let npts = sym.num_points();
        let mut positions = HashMap::new();
        positions.insert(Cusp::infinity(sym.ctx()), 0usize);
        for (k, c) in cs.iter().enumerate().take(npts).skip(1) {
            positions.insert(c.point(), k);
        }
        let mut b = Builder {
            sym,
            positions,
            directed: Vec::new(),
            by_line: HashMap::new(),
            tiles: Vec::new(),
            limit: index,
        };
        // Interior side of each ordinary interval.
        let mut interior: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, l) in sym.labels().iter().enumerate() {
            if l.is_ordinary() {
                interior.insert((sym.position(i), sym.position(i + 1)), i);
            }
        }
        let v = depth_one_cusps(sym.ctx());
        let q = sym.q() as usize;
        let mut queue = VecDeque::new();
        for (i, l) in sym.labels().iter().enumerate() {
            match l {
                IntervalLabel::Odd => {
                    b.add_tile(TileKind::Odd, vec![(sym.position(i + 1), sym.position(i))])?;
                }
                IntervalLabel::Cluster { r, g } => {
                    let mut pts = vec![b.pos(&act(g, &v[q - 1]))?];
                    for c in &v[..*r as usize] {
                        pts.push(b.pos(&act(g, c))?);
                    }
                    let lines = pts.windows(2).map(|w| (w[0], w[1])).collect();
                    queue.push_back(b.add_tile(TileKind::Cluster(*r), lines)?);
                }
                _ => {}
            }
        }
        if queue.is_empty() && npts > 2 {
            let k = sym
                .labels()
                .iter()
                .position(|l| l.is_ordinary())
                .ok_or_else(|| Error::CorruptSymbol("no ordinary interval".into()))?;
            queue.push_back(b.qgon(sym.position(k + 1), sym.position(k))?);
        }
        while let Some(t) = queue.pop_front() {
            let lines: Vec<(usize, usize)> = b.tiles[t].triangles.iter().map(|&x| b.directed[x]).collect();
            for (u, w) in lines {
                if interior.contains_key(&(u, w)) || b.by_line.contains_key(&(w, u)) {
                    continue;
                }
                queue.push_back(b.qgon(u, w)?);
            }
        }
        if b.directed.len() != index {
            return Err(Error::CorruptSymbol(format!(
                "tiling has {} triangles but the index is {index}",
                b.directed.len()
            )));
        }

        // Group triangles into lines.
        let und = |(u, w): (usize, usize)| (u.min(w), u.max(w));
        let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, &l) in b.directed.iter().enumerate() {
            groups.entry(und(l)).or_default().push(t);
        }
        let key = |(u, w): (usize, usize)| {
            let f = |p: usize| if p == 0 { npts } else { p };
            let (a, c) = (f(u).min(f(w)), f(u).max(f(w)));
            (a, Reverse(c))
        };
        let unbarred_first = |tris: &mut Vec<usize>| {
            let (u, w) = b.directed[tris[0]];
            let first_ok = if u == 0 || w == 0 { u == 0 } else { u < w };
            if !first_ok {
                tris.swap(0, 1);
            }
        };
        let mut raw: Vec<((usize, Reverse<usize>), Line)> = Vec::new();
        let mut pending_free: HashMap<u32, (usize, usize)> = HashMap::new();
        let mut groups: Vec<_> = groups.into_iter().collect();
        groups.sort();
        for (ends, mut tris) in groups {
            match tris.len() {
                2 => {
                    unbarred_first(&mut tris);
                    raw.push((key(ends), Line { kind: LineKind::Shared, ends, triangles: tris }));
                }
                1 => {
                    let t = tris[0];
                    let i = *interior
                        .get(&b.directed[t])
                        .ok_or_else(|| Error::CorruptSymbol(format!("line {ends:?} has a single triangle")))?;
                    match sym.labels()[i] {
                        IntervalLabel::Even => {
                            raw.push((key(ends), Line { kind: LineKind::SelfPaired, ends, triangles: tris }))
                        }
                        IntervalLabel::Free(tag) => {
                            if let Some((j, tj)) = pending_free.remove(&tag) {
                                let (first, ft, st) = if i < j { (i, t, tj) } else { (j, tj, t) };
                                let fe = (sym.position(first), sym.position(first + 1));
                                raw.push((
                                    key(fe),
                                    Line { kind: LineKind::Shared, ends: und(fe), triangles: vec![ft, st] },
                                ));
                            } else {
                                pending_free.insert(tag, (i, t));
                            }
                        }
                        _ => return Err(Error::CorruptSymbol(format!("line {ends:?} has a single triangle"))),
                    }
                }
                _ => return Err(Error::CorruptSymbol(format!("line {ends:?} carries more than two triangles"))),
            }
        }
        if !pending_free.is_empty() {
            return Err(Error::CorruptSymbol("unmatched free side".into()));
        }
        raw.sort_by(|a, b| a.0.cmp(&b.0));

        // Renumber triangles as 1, 1~, 2, 2~, ...
        let n = b.directed.len();
        let mut new_id = vec![usize::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut next = 0;
        for (k, (_, line)) in raw.iter().enumerate() {
            for (j, &t) in line.triangles.iter().enumerate() {
                new_id[t] = next;
                next += 1;
                labels.push(if j == 0 { format!("{}", k + 1) } else { format!("{}~", k + 1) });
            }
        }
        let mut directed = vec![(0, 0); n];
        for (t, &d) in b.directed.iter().enumerate() {
            directed[new_id[t]] = d;
        }
        let lines: Vec<Line> = raw
            .into_iter()
            .map(|(_, mut l)| {
                l.triangles = l.triangles.iter().map(|&t| new_id[t]).collect();
                l
            })
            .collect();
        let tiles: Vec<Tile> = b
            .tiles
            .into_iter()
            .map(|mut t| {
                t.triangles = t.triangles.iter().map(|&x| new_id[x]).collect();
                t
            })
            .collect();

        let mut s_cycles = Vec::new();
        for l in &lines {
            s_cycles.push(l.triangles.clone());
        }
        let f_s = Perm::from_cycles(n, &s_cycles)?;
        let r_cycles: Vec<Vec<usize>> = tiles.iter().map(|t| t.triangles.clone()).collect();
        let f_r = Perm::from_cycles(n, &r_cycles)?;

        let zero = sym.position(cs.iter().position(|c| c.is_zero()).ok_or_else(|| Error::CorruptSymbol("no cusp 0".into()))?);
        let find = |d: (usize, usize)| directed.iter().position(|&x| x == d);
        let base = match find((0, zero)) {
            Some(t) => t,
            None => f_s.apply(find((zero, 0)).ok_or_else(|| Error::CorruptSymbol("no triangle on (0, inf)".into()))?),
        };
        Ok(Omega { directed, tiles, lines, f_s, f_r, base, labels })
    }

    pub fn size(&self) -> usize {
        self.directed.len()
    }

    /// Printable label of triangle `t`: `k` or `k~`.
    pub fn label(&self, t: usize) -> &str {
        &self.labels[t]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the triangle with the given printable label.
    pub fn by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn format(&self, p: &Perm) -> String {
        p.cycle_string(|t| self.labels[t].clone())
    }

    fn letter(&self, l: Letter) -> Perm {
        match l {
            Letter::S => self.f_s.clone(),
            Letter::R(k) => self.f_r.pow(k),
            other => self.f_word(&Word(vec![other])),
        }
    }

    /// The permutation of a word, composed as functions (the rightmost letter acts first).
    pub fn f_word(&self, w: &Word) -> Perm {
        w.to_sr()
            .into_iter()
            .rev()
            .fold(Perm::identity(self.size()), |acc, l| acc.then(&self.letter(l)))
    }

    /// f(T) = f(R⁻¹S).
    pub fn f_t(&self) -> Perm {
        self.f_word(&Word(vec![Letter::T(1)]))
    }

    /// f(U) = f(RS).
    pub fn f_u(&self) -> Perm {
        self.f_word(&Word(vec![Letter::U(1)]))
    }

    /// Image of the base triangle under the coset action of a word over {S, R}, read left to right.
    pub fn act_right(&self, letters: &[Letter]) -> usize {
        letters.iter().fold(self.base, |x, &l| self.letter(l).apply(x))
    }

    pub fn group_order(&self) -> BigUint {
        group_order(&[self.f_s.clone(), self.f_r.clone()], self.size())
    }

    /// Normal exactly when the permutation group is regular. A transitive
    /// group is regular when its centralizer is transitive too.
    pub fn is_normal(&self) -> bool {
        match self.centralizer() {
            Ok(c) => c.len() == self.size(),
            Err(_) => self.group_order() == BigUint::from(self.size()),
        }
    }

    pub fn centralizer(&self) -> Result<Vec<Perm>> {
        centralizer(&[self.f_s.clone(), self.f_r.clone()], self.size())
    }

    /// Number of cycles of f(T).
    pub fn cusp_count(&self) -> usize {
        self.f_t().cycles().len()
    }
}
