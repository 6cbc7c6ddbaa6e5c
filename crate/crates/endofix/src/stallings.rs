//! Folded core graphs of finitely generated subgroups of `F_n`.
//!
//! A `CoreGraph` is a based, generator-labeled graph with a
//! deterministic transition table; its basepoint loops spell exactly
//! the elements of the subgroup. Construction folds the spokes of the
//! given generators with a union-find and then trims spurs (the
//! basepoint is never trimmed). Graphs are canonically renumbered by
//! BFS from the basepoint in letter order, so equal subgroups yield
//! identical values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::words::{fixed_words_up_to, letter_key, Endomorphism, Letter, Word};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = (self.find(i), self.find(j));
        if a == b {
            return false;
        }
        // keep the smaller root so the basepoint (vertex 0) survives
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.parent[hi] = lo;
        true
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoreGraph {
    base: usize,
    /// `arcs[v][l] = w` means an arc from `v` to `w` labeled by the
    /// signed generator `l`; the inverse arc is always present too.
    arcs: Vec<BTreeMap<Letter, usize>>,
}

impl CoreGraph {
    /// Stallings fold of the subgroup generated by `words`.
    pub fn fold(words: &[Word], rank: usize) -> CoreGraph {
        let _ = rank; // labels are validated by Word construction
        // spokes: one loop at the basepoint per generator word
        let mut n = 1usize;
        let mut arc_list: Vec<(usize, Letter, usize)> = Vec::new();
        for w in words {
            if w.is_empty() {
                continue;
            }
            let mut prev = 0usize;
            for (i, &l) in w.letters().iter().enumerate() {
                let next = if i + 1 == w.len() {
                    0
                } else {
                    n += 1;
                    n - 1
                };
                arc_list.push((prev, l, next));
                prev = next;
            }
        }
        // fold: merge targets of equally labeled arcs at one vertex
        let mut uf = UnionFind::new(n);
        loop {
            let mut table: BTreeMap<(usize, Letter), usize> = BTreeMap::new();
            let mut changed = false;
            for &(u, l, v) in &arc_list {
                for (a, ll, b) in [(u, l, v), (v, -l, u)] {
                    let (ra, rb) = (uf.find(a), uf.find(b));
                    match table.get(&(ra, ll)) {
                        Some(&rc) if rc != rb => {
                            uf.union(rb, rc);
                            changed = true;
                        }
                        Some(_) => {}
                        None => {
                            table.insert((ra, ll), rb);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // rebuild on root ids
        let mut roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        for &r in &roots {
            let next = ids.len();
            ids.entry(r).or_insert(next);
        }
        roots = roots.iter().map(|r| ids[r]).collect();
        let mut arcs: Vec<BTreeMap<Letter, usize>> = vec![BTreeMap::new(); ids.len()];
        for &(u, l, v) in &arc_list {
            arcs[roots[u]].insert(l, roots[v]);
            arcs[roots[v]].insert(-l, roots[u]);
        }
        let mut g = CoreGraph { base: roots[0], arcs };
        g.trim();
        g.canonicalize();
        g
    }

    /// Removes non-basepoint vertices of degree <= 1 until none remain.
    fn trim(&mut self) {
        loop {
            let spur = (0..self.arcs.len())
                .find(|&v| v != self.base && self.arcs[v].len() <= 1);
            let Some(v) = spur else { break };
            let incident: Vec<(Letter, usize)> =
                self.arcs[v].iter().map(|(&l, &w)| (l, w)).collect();
            for (l, w) in incident {
                self.arcs[w].remove(&-l);
            }
            self.arcs.remove(v);
            for map in &mut self.arcs {
                for tgt in map.values_mut() {
                    if *tgt > v {
                        *tgt -= 1;
                    }
                }
            }
            if self.base > v {
                self.base -= 1;
            }
        }
    }

    /// BFS renumbering from the basepoint, neighbors in letter order.
    fn canonicalize(&mut self) {
        let n = self.arcs.len();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(self.base);
        seen[self.base] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut labels: Vec<Letter> = self.arcs[v].keys().copied().collect();
            labels.sort_by_key(|&l| letter_key(l));
            for l in labels {
                let w = self.arcs[v][&l];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        // unreachable vertices cannot occur: spokes are connected
        debug_assert_eq!(order.len(), n);
        let mut renum = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            renum[old] = new;
        }
        let mut arcs = vec![BTreeMap::new(); n];
        for (old, map) in self.arcs.iter().enumerate() {
            for (&l, &w) in map {
                arcs[renum[old]].insert(l, renum[w]);
            }
        }
        self.base = renum[self.base];
        self.arcs = arcs;
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn n_vertices(&self) -> usize {
        self.arcs.len()
    }

    pub fn n_edges(&self) -> usize {
        self.arcs.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    pub fn arc(&self, v: usize, l: Letter) -> Option<usize> {
        self.arcs[v].get(&l).copied()
    }

    /// Arcs leaving `v` in letter order.
    pub fn arcs_at(&self, v: usize) -> Vec<(Letter, usize)> {
        let mut out: Vec<(Letter, usize)> = self.arcs[v].iter().map(|(&l, &w)| (l, w)).collect();
        out.sort_by_key(|&(l, _)| letter_key(l));
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.arcs[v].len()
    }

    /// First Betti number `E - V + 1` of the (connected) core.
    pub fn subgroup_rank(&self) -> usize {
        self.n_edges() + 1 - self.n_vertices()
    }

    /// Deterministic reading; `None` iff some prefix leaves the table.
    pub fn read(&self, start: usize, w: &Word) -> Option<usize> {
        let mut v = start;
        for &l in w.letters() {
            v = self.arc(v, l)?;
        }
        Some(v)
    }

    /// Like [`read`](Self::read) but also returns the traversed arcs.
    pub fn read_path(&self, start: usize, w: &Word) -> Option<(usize, Vec<(usize, Letter, usize)>)> {
        let mut v = start;
        let mut trace = Vec::with_capacity(w.len());
        for &l in w.letters() {
            let next = self.arc(v, l)?;
            trace.push((v, l, next));
            v = next;
        }
        Some((v, trace))
    }

    pub fn membership(&self, w: &Word) -> bool {
        self.read(self.base, w) == Some(self.base)
    }

    /// Spelling of the BFS tree path from the basepoint to `v`.
    pub fn vertex_word(&self, v: usize) -> Word {
        // canonical numbering is BFS order, so parents have smaller ids
        let mut letters_rev: Vec<Letter> = Vec::new();
        let mut cur = v;
        let dist = self.bfs_dist();
        while cur != self.base {
            let (l, p) = self
                .arcs_at(cur)
                .into_iter()
                .filter(|&(_, w)| dist[w] + 1 == dist[cur])
                .min_by_key(|&(l, w)| (w, letter_key(-l)))
                .expect("connected core");
            letters_rev.push(-l);
            cur = p;
        }
        letters_rev.reverse();
        Word::from_letters(&letters_rev)
    }

    fn bfs_dist(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices()];
        dist[self.base] = 0;
        let mut queue = std::collections::VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for (_, w) in self.arcs_at(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All distinct spellings of paths from the basepoint to `v` of
    /// length at most `max_len`, in contract order.
    pub fn vertex_words_up_to(&self, v: usize, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        // BFS over (vertex, word) pairs, pruned by length
        let mut layer: Vec<(usize, Vec<Letter>)> = vec![(self.base, Vec::new())];
        if v == self.base {
            out.push(Word::empty());
        }
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (u, w) in &layer {
                for (l, t) in self.arcs_at(*u) {
                    if w.last() == Some(&-l) {
                        continue; // reduced spellings only
                    }
                    let mut w2 = w.clone();
                    w2.push(l);
                    if t == v {
                        out.push(Word::from_letters(&w2));
                    }
                    next.push((t, w2));
                }
            }
            layer = next;
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut arcs = Vec::new();
        for v in 0..self.n_vertices() {
            for (l, w) in self.arcs_at(v) {
                if l > 0 {
                    arcs.push(serde_json::json!([v, Word::from_letters(&[l]).to_string(), w]));
                }
            }
        }
        serde_json::json!({
            "vertices": self.n_vertices(),
            "base": self.base,
            "arcs": arcs,
        })
    }
}

/// True iff every generator of `F_n` lies in the image subgroup.
pub fn is_surjective(phi: &Endomorphism) -> bool {
    let core = CoreGraph::fold(phi.images(), phi.rank());
    (1..=phi.rank()).all(|g| core.membership(&Word::generator(g)))
}

/// True iff the image subgroup has full rank `n`; valid because the
/// images generate `phi(F_n)`, which is free of rank `n` exactly when
/// `phi` is injective.
pub fn is_injective(phi: &Endomorphism) -> bool {
    let core = CoreGraph::fold(phi.images(), phi.rank());
    core.subgroup_rank() == phi.rank()
}

/// Core of the subgroup generated by all fixed words up to the cutoff,
/// with its rank. The rank is a lower bound for `rk fix phi`; the
/// cutoff must accompany it in any report.
pub fn fixed_subgroup_approx(phi: &Endomorphism, max_len: usize) -> (CoreGraph, usize) {
    let fixed = fixed_words_up_to(phi, max_len);
    let core = CoreGraph::fold(&fixed, phi.rank());
    let rank = core.subgroup_rank();
    (core, rank)
}

/// Convenience error-checked variant used by report code.
pub fn require_injective(phi: &Endomorphism) -> Result<()> {
    if is_injective(phi) {
        Ok(())
    } else {
        Err(Error::NotInjective)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::reduced_words_up_to;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn referee_image() -> CoreGraph {
        CoreGraph::fold(&[w("ab"), w("aBa")], 2)
    }

    #[test]
    fn fold_referee_image_subgroup() {
        let g = referee_image();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.n_edges(), 4);
        assert_eq!(g.subgroup_rank(), 2);
    }

    #[test]
    fn fold_single_loop() {
        let g = CoreGraph::fold(&[w("a")], 2);
        assert_eq!(g.n_vertices(), 1);
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.subgroup_rank(), 1);
    }

    #[test]
    fn fold_empty() {
        let g = CoreGraph::fold(&[], 2);
        assert_eq!(g.n_vertices(), 1);
        assert_eq!(g.n_edges(), 0);
        assert_eq!(g.subgroup_rank(), 0);
    }

    #[test]
    fn membership_examples() {
        let g = referee_image();
        assert!(g.membership(&w("ab")));
        assert!(g.membership(&w("aBa")));
        assert!(!g.membership(&w("a")));
        let loop_a = CoreGraph::fold(&[w("a")], 2);
        assert!(loop_a.membership(&w("aaa")));
        assert!(!loop_a.membership(&w("b")));
    }

    #[test]
    fn read_path_examples() {
        let g = referee_image();
        assert_eq!(g.read(g.base(), &Word::empty()), Some(g.base()));
        assert_eq!(g.read(g.base(), &w("ab")), Some(g.base()));
        assert_eq!(g.read(g.base(), &w("b")), None);
        let (end, trace) = g.read_path(g.base(), &w("aB")).unwrap();
        assert_eq!(trace.len(), 2);
        assert_ne!(end, g.base());
    }

    #[test]
    fn rank_examples() {
        let rose = CoreGraph::fold(&[w("a"), w("b"), w("c")], 3);
        assert_eq!(rose.subgroup_rank(), 3);
        assert_eq!(CoreGraph::fold(&[], 3).subgroup_rank(), 0);
    }

    #[test]
    fn injective_surjective_examples() {
        let jiang = Endomorphism::parse_text("rank: 2\na -> a\nb -> Bab\n").unwrap();
        let referee = Endomorphism::parse_text("rank: 2\na -> ab\nb -> aBa\n").unwrap();
        assert!(is_injective(&jiang));
        assert!(!is_surjective(&jiang));
        assert!(is_injective(&referee));
        assert!(!is_surjective(&referee));
        let id = Endomorphism::identity(2);
        assert!(is_injective(&id));
        assert!(is_surjective(&id));
    }

    #[test]
    fn fixed_subgroup_approx_examples() {
        let jiang = Endomorphism::parse_text("rank: 2\na -> a\nb -> Bab\n").unwrap();
        let (core, rank) = fixed_subgroup_approx(&jiang, 3);
        assert_eq!(rank, 1);
        assert_eq!(core.n_vertices(), 1);
        let referee = Endomorphism::parse_text("rank: 2\na -> ab\nb -> aBa\n").unwrap();
        assert_eq!(fixed_subgroup_approx(&referee, 6).1, 0);
        assert_eq!(fixed_subgroup_approx(&Endomorphism::identity(2), 1).1, 2);
    }

    #[test]
    fn image_cores_of_injective_have_constant_rank() {
        let referee = Endomorphism::parse_text("rank: 2\na -> ab\nb -> aBa\n").unwrap();
        for k in 1..=5 {
            let phik = referee.power(k);
            let core = CoreGraph::fold(phik.images(), 2);
            assert_eq!(core.subgroup_rank(), 2, "k={k}");
        }
    }

    /// Independent membership oracle: close the generator set under
    /// multiplication within a generous length budget, then filter.
    fn brute_force_elements(gens: &[Word], max_len: usize, budget: usize) -> Vec<Word> {
        let mut set: std::collections::BTreeSet<Word> = [Word::empty()].into();
        loop {
            let mut grew = false;
            let snapshot: Vec<Word> = set.iter().cloned().collect();
            for u in &snapshot {
                for g in gens.iter().flat_map(|g| [g.clone(), g.inverse()]) {
                    let p = u.concat(&g);
                    if p.len() <= budget && set.insert(p) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        set.into_iter().filter(|u| u.len() <= max_len).collect()
    }

    #[test]
    fn membership_agrees_with_brute_force() {
        let cases: Vec<Vec<Word>> = vec![
            vec![w("ab"), w("aBa")],
            vec![w("aa"), w("b")],
            vec![w("aba")],
            vec![w("ab"), w("ba")],
            vec![w("aab"), w("bb"), w("Aba")],
        ];
        for gens in cases {
            let core = CoreGraph::fold(&gens, 2);
            let oracle = brute_force_elements(&gens, 6, 14);
            for u in reduced_words_up_to(2, 6) {
                let expect = oracle.contains(&u);
                assert_eq!(core.membership(&u), expect, "word {u} in <{gens:?}>");
            }
        }
    }

    proptest! {
        #[test]
        fn folding_is_confluent(perm in proptest::sample::subsequence(
            vec![0usize, 1, 2, 3], 4)) {
            let gens = [w("ab"), w("aBa"), w("bb"), w("aab")];
            let mut order: Vec<usize> = perm.clone();
            for i in 0..4 {
                if !order.contains(&i) {
                    order.push(i);
                }
            }
            let shuffled: Vec<Word> = order.iter().map(|&i| gens[i].clone()).collect();
            let g1 = CoreGraph::fold(&gens, 2);
            let g2 = CoreGraph::fold(&shuffled, 2);
            prop_assert_eq!(g1, g2);
        }
    }

    #[test]
    fn vertex_words_read_back() {
        let g = referee_image();
        for v in 0..g.n_vertices() {
            let u = g.vertex_word(v);
            assert_eq!(g.read(g.base(), &u), Some(v));
        }
        let alts = g.vertex_words_up_to(1, 4);
        assert!(!alts.is_empty());
        for u in alts {
            assert_eq!(g.read(g.base(), &u), Some(1));
        }
    }

    #[test]
    fn json_shape() {
        let g = CoreGraph::fold(&[w("a")], 2);
        let j = g.to_json();
        assert_eq!(j["vertices"], 1);
        assert_eq!(j["base"], 0);
        assert_eq!(j["arcs"][0], serde_json::json!([0, "a", 0]));
    }
}
