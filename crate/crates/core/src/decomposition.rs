//! Dependence structure of a sum W = Σ X_i through independent randomness
//! sources.
//!
//! Each summand is attached to a nonempty set of atoms (mutually independent
//! random elements). Neighborhoods are derived by source overlap: the first
//! neighborhood of i collects every summand sharing an atom with i, the
//! second adds everything touching the atoms of {i, j}, and so on. Summands
//! whose sources are disjoint from a conditioning set are independent of it,
//! so these neighborhoods satisfy the required independence conditions by
//! construction.

use rayon::prelude::*;
use std::collections::BTreeSet;

use crate::{Error, Result};

/// Summands attached to independent randomness sources.
#[derive(Debug, Clone)]
pub struct DependencyModel {
    sources: Vec<BTreeSet<usize>>,
    beta: f64,
    /// atom index -> summands that use it
    atom_users: Vec<Vec<usize>>,
}

/// Uniform bounds (β, n1, n2, n3) on summand magnitude and neighborhood sizes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StructureParams {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub beta: f64,
}

/// Outcome of the structural consistency check.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub violations: Vec<String>,
    pub checked_tuples: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const DEFAULT_TUPLE_BUDGET: u128 = 100_000_000;

impl DependencyModel {
    /// `sources[i]` lists the atoms summand i depends on; `beta` bounds |X_i|.
    pub fn new(sources: Vec<BTreeSet<usize>>, beta: f64) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::invalid("model needs at least one summand"));
        }
        if sources.iter().any(|s| s.is_empty()) {
            return Err(Error::invalid("every summand needs at least one atom"));
        }
        if !(beta > 0.0) {
            return Err(Error::invalid("beta must be > 0"));
        }
        let max_atom = sources.iter().flat_map(|s| s.iter()).max().copied().unwrap();
        let mut atom_users = vec![Vec::new(); max_atom + 1];
        for (i, s) in sources.iter().enumerate() {
            for &a in s {
                atom_users[a].push(i);
            }
        }
        Ok(DependencyModel {
            sources,
            beta,
            atom_users,
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sources(&self, i: usize) -> &BTreeSet<usize> {
        &self.sources[i]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Summands sharing an atom with any atom in `atoms` (sorted, deduped).
    fn touching(&self, atoms: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &a in atoms {
            out.extend(self.atom_users[a].iter().copied());
        }
        out
    }

    /// N_i = { j : S_j ∩ S_i ≠ ∅ }; contains i, and W - X_{N_i} is
    /// independent of X_i because the remaining summands share no atoms
    /// with S_i.
    pub fn neighborhood(&self, i: usize) -> Result<Vec<usize>> {
        self.check_index(i)?;
        Ok(self.touching(&self.sources[i]).into_iter().collect())
    }

    /// N_ij for j in N_i: everything touching S_i ∪ S_j.
    pub fn neighborhood2(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check_index(i)?;
        self.check_index(j)?;
        let ni = self.touching(&self.sources[i]);
        if !ni.contains(&j) {
            return Err(Error::invalid(format!(
                "neighborhood2 requires j in N_i (i={i}, j={j})"
            )));
        }
        let union: BTreeSet<usize> = self.sources[i]
            .union(&self.sources[j])
            .copied()
            .collect();
        Ok(self.touching(&union).into_iter().collect())
    }

    /// N_ijk for j in N_i, k in N_ij: everything touching S_i ∪ S_j ∪ S_k.
    pub fn neighborhood3(&self, i: usize, j: usize, k: usize) -> Result<Vec<usize>> {
        self.check_index(k)?;
        let nij: BTreeSet<usize> = self.neighborhood2(i, j)?.into_iter().collect();
        if !nij.contains(&k) {
            return Err(Error::invalid(format!(
                "neighborhood3 requires k in N_ij (i={i}, j={j}, k={k})"
            )));
        }
        let mut union: BTreeSet<usize> = self.sources[i]
            .union(&self.sources[j])
            .copied()
            .collect();
        union.extend(self.sources[k].iter().copied());
        Ok(self.touching(&union).into_iter().collect())
    }

    /// (n1, n2, n3) maximized over exactly the admissible tuples:
    /// pairs with j in N_i and triples with k in N_ij.
    pub fn structure_params(&self) -> Result<StructureParams> {
        self.structure_params_with_budget(DEFAULT_TUPLE_BUDGET)
    }

    pub fn structure_params_with_budget(&self, budget: u128) -> Result<StructureParams> {
        let n = self.len();
        // cheap upper bound on the tuple count before enumerating
        let n1_cap = (0..n)
            .map(|i| self.touching(&self.sources[i]).len())
            .max()
            .unwrap();
        let est = n as u128 * n1_cap as u128 * n as u128;
        if est > budget {
            return Err(Error::BudgetExceeded {
                required: est,
                budget,
            });
        }
        let (n1, n2, n3) = (0..n)
            .into_par_iter()
            .map(|i| {
                let ni = self.touching(&self.sources[i]);
                let mut n1 = ni.len();
                let mut n2 = 0usize;
                let mut n3 = 0usize;
                for &j in &ni {
                    let union_ij: BTreeSet<usize> = self.sources[i]
                        .union(&self.sources[j])
                        .copied()
                        .collect();
                    let nij = self.touching(&union_ij);
                    n2 = n2.max(nij.len());
                    for &k in &nij {
                        let mut union = union_ij.clone();
                        union.extend(self.sources[k].iter().copied());
                        n3 = n3.max(self.touching(&union).len());
                    }
                }
                n1 = n1.max(1);
                (n1, n2, n3)
            })
            .reduce(
                || (0, 0, 0),
                |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)),
            );
        Ok(StructureParams {
            n1,
            n2,
            n3,
            beta: self.beta,
        })
    }

    /// Checks i ∈ N_i ⊆ N_ij ⊆ N_ijk and source-disjointness of every
    /// complement, for the derived neighborhoods. Violations are reported,
    /// not raised.
    pub fn verify_structure(&self) -> VerifyReport {
        let nb = |i: usize| self.neighborhood(i).unwrap();
        let nb2 = |i: usize, j: usize| self.neighborhood2(i, j).unwrap();
        let nb3 = |i: usize, j: usize, k: usize| self.neighborhood3(i, j, k).unwrap();
        self.verify_neighborhoods(&nb, &nb2, &nb3)
    }

    /// Same checks against caller-supplied neighborhood maps (lets tests
    /// inject deliberately broken structures).
    pub fn verify_neighborhoods(
        &self,
        nb: &dyn Fn(usize) -> Vec<usize>,
        nb2: &dyn Fn(usize, usize) -> Vec<usize>,
        nb3: &dyn Fn(usize, usize, usize) -> Vec<usize>,
    ) -> VerifyReport {
        let mut violations = Vec::new();
        let mut checked = 0usize;
        let n = self.len();
        for i in 0..n {
            let ni: BTreeSet<usize> = nb(i).into_iter().collect();
            checked += 1;
            if !ni.contains(&i) {
                violations.push(format!("i={i}: N_i does not contain i"));
            }
            self.check_complement_disjoint(&ni, &[i], &mut violations, &format!("N_{i}"));
            for &j in &ni {
                let nij: BTreeSet<usize> = nb2(i, j).into_iter().collect();
                checked += 1;
                if !ni.is_subset(&nij) {
                    violations.push(format!("(i={i}, j={j}): N_i not a subset of N_ij"));
                }
                self.check_complement_disjoint(
                    &nij,
                    &[i, j],
                    &mut violations,
                    &format!("N_{i}{j}"),
                );
                for &k in &nij {
                    let nijk: BTreeSet<usize> = nb3(i, j, k).into_iter().collect();
                    checked += 1;
                    if !nij.is_subset(&nijk) {
                        violations
                            .push(format!("(i={i}, j={j}, k={k}): N_ij not a subset of N_ijk"));
                    }
                    self.check_complement_disjoint(
                        &nijk,
                        &[i, j, k],
                        &mut violations,
                        &format!("N_{i}{j}{k}"),
                    );
                    if violations.len() > 64 {
                        return VerifyReport {
                            violations,
                            checked_tuples: checked,
                        };
                    }
                }
            }
        }
        VerifyReport {
            violations,
            checked_tuples: checked,
        }
    }

    fn check_complement_disjoint(
        &self,
        nbhd: &BTreeSet<usize>,
        conditioning: &[usize],
        violations: &mut Vec<String>,
        label: &str,
    ) {
        let mut cond_atoms = BTreeSet::new();
        for &c in conditioning {
            cond_atoms.extend(self.sources[c].iter().copied());
        }
        // complement summands must not touch the conditioning atoms
        for &a in &cond_atoms {
            for &user in &self.atom_users[a] {
                if !nbhd.contains(&user) {
                    violations.push(format!(
                        "{label}: summand {user} outside the neighborhood shares atom {a}"
                    ));
                    return;
                }
            }
        }
    }

    /// Parses the model-file format: one `i: a1,a2,...` line per summand.
    pub fn parse(text: &str, beta: f64) -> Result<Self> {
        let mut entries: Vec<(usize, BTreeSet<usize>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (idx, atoms) = line.split_once(':').ok_or(Error::Parse {
                line: lineno + 1,
                message: "expected `i: a1,a2,...`".into(),
            })?;
            let i: usize = idx.trim().parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad summand index: {e}"),
            })?;
            let atoms: BTreeSet<usize> = atoms
                .split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad atom index {t:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            entries.push((i, atoms));
        }
        entries.sort_by_key(|e| e.0);
        for (pos, (i, _)) in entries.iter().enumerate() {
            if *i != pos {
                return Err(Error::invalid(format!(
                    "summand indices must be 0..n-1 without gaps (missing or duplicate {pos})"
                )));
            }
        }
        DependencyModel::new(entries.into_iter().map(|e| e.1).collect(), beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disjoint_model(n: usize) -> DependencyModel {
        DependencyModel::new((0..n).map(|i| BTreeSet::from([i])).collect(), 1.0).unwrap()
    }

    /// Edge model of the 4-cycle: summand per edge, atoms = endpoint vertices.
    fn c4_model() -> DependencyModel {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0)];
        DependencyModel::new(
            edges.iter().map(|&(u, v)| BTreeSet::from([u, v])).collect(),
            1.0,
        )
        .unwrap()
    }

    /// Chain model: S_i = {i, i+1}.
    fn chain_model(n: usize) -> DependencyModel {
        DependencyModel::new((0..n).map(|i| BTreeSet::from([i, i + 1])).collect(), 1.0).unwrap()
    }

    #[test]
    fn disjoint_sources_neighborhoods() {
        let m = disjoint_model(5);
        for i in 0..5 {
            assert_eq!(m.neighborhood(i).unwrap(), vec![i]);
            assert_eq!(m.neighborhood2(i, i).unwrap(), vec![i]);
            assert_eq!(m.neighborhood3(i, i, i).unwrap(), vec![i]);
        }
        let p = m.structure_params().unwrap();
        assert_eq!((p.n1, p.n2, p.n3), (1, 1, 1));
    }

    #[test]
    fn c4_neighborhoods() {
        let m = c4_model();
        // edge 0 = {0,1} touches edges 1 = {1,2} and 3 = {3,0}
        assert_eq!(m.neighborhood(0).unwrap(), vec![0, 1, 3]);
        // i=0, j=1 covers vertices {0,1,2}: every edge of C4 touches them
        assert_eq!(m.neighborhood2(0, 1).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(m.neighborhood3(0, 1, 2).unwrap(), vec![0, 1, 2, 3]);
        let p = m.structure_params().unwrap();
        assert_eq!((p.n1, p.n2, p.n3), (3, 4, 4));
    }

    #[test]
    fn shared_atom_full_dependence() {
        let m = DependencyModel::new(
            (0..4).map(|i| BTreeSet::from([0usize, i + 1])).collect(),
            1.0,
        )
        .unwrap();
        assert_eq!(m.neighborhood(2).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn chain_neighborhoods() {
        let m = chain_model(6);
        // i=1, j=2: atoms {1,2} ∪ {2,3} = {1,2,3}; touched: 0,1,2,3
        assert_eq!(m.neighborhood2(1, 2).unwrap(), vec![0, 1, 2, 3]);
        // i=1,j=2,k=3: atoms {1,2,3,4}; touched 0..=4
        assert_eq!(m.neighborhood3(1, 2, 3).unwrap(), vec![0, 1, 2, 3, 4]);
        // 0-based chain: i=0,j=1,k=2 -> atoms {0,1,2,3} -> summands 0,1,2,3
        assert_eq!(m.neighborhood3(0, 1, 2).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn precondition_violations() {
        let m = disjoint_model(4);
        assert!(m.neighborhood2(0, 1).is_err());
        assert!(m.neighborhood(9).is_err());
    }

    #[test]
    fn verify_structure_passes_for_derived() {
        for m in [disjoint_model(4), c4_model(), chain_model(5)] {
            let rep = m.verify_structure();
            assert!(rep.passed(), "{:?}", rep.violations);
            assert!(rep.checked_tuples > 0);
        }
    }

    #[test]
    fn verify_flags_injected_violation() {
        let m = c4_model();
        // N_ij deliberately missing N_i
        let nb = |i: usize| m.neighborhood(i).unwrap();
        let nb2 = |i: usize, _j: usize| vec![i];
        let nb3 = |i: usize, j: usize, k: usize| m.neighborhood3(i, j, k).unwrap_or(vec![i, j, k]);
        let rep = m.verify_neighborhoods(&nb, &nb2, &nb3);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.contains("not a subset")));
    }

    #[test]
    fn symmetry_of_neighborhoods() {
        let m = chain_model(8);
        for i in 0..8 {
            for j in m.neighborhood(i).unwrap() {
                assert!(m.neighborhood(j).unwrap().contains(&i));
            }
        }
    }

    #[test]
    fn adding_atom_never_shrinks() {
        let base = chain_model(6);
        let mut srcs: Vec<BTreeSet<usize>> = (0..6).map(|i| base.sources(i).clone()).collect();
        srcs[2].insert(99);
        let bigger = DependencyModel::new(srcs, 1.0).unwrap();
        for i in 0..6 {
            let a: BTreeSet<usize> = base.neighborhood(i).unwrap().into_iter().collect();
            let b: BTreeSet<usize> = bigger.neighborhood(i).unwrap().into_iter().collect();
            assert!(a.is_subset(&b));
        }
    }

    #[test]
    fn budget_guard() {
        let m = chain_model(50);
        assert!(matches!(
            m.structure_params_with_budget(10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn parse_model_file() {
        let text = "0: 0,1\n1: 1,2\n2: 2,3\n";
        let m = DependencyModel::parse(text, 0.5).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.beta(), 0.5);
        assert_eq!(m.neighborhood(1).unwrap(), vec![0, 1, 2]);
        assert!(DependencyModel::parse("0: 0\n2: 1\n", 1.0).is_err());
        assert!(DependencyModel::parse("0 0,1\n", 1.0).is_err());
    }
}
