//! Exact SAW counts from the configuration grammar: substitute `z^weight`
//! for every terminal and take the least fixed point in truncated series.

mod estimate;
mod truncated;

use std::collections::HashMap;

use num_bigint::BigUint;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::decomposition::ConeTypeSystem;
use crate::error::{Error, Result};
use crate::grammar::{build_config_cfg, ConfigCfg};
use crate::limits::Limits;

pub use estimate::{connective_estimate, series_table, ConnectiveEstimate};
pub use truncated::TruncatedSeries;

pub type ExactSeries = TruncatedSeries<BigUint>;
pub type FloatSeries = TruncatedSeries<f64>;

pub type SumId = usize;

/// `z^z_pow` times the product of the listed sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub z_pow: usize,
    pub factors: Vec<SumId>,
}

/// Unknowns `X_i = Σ monomials`, where every factor is a sum of unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialSystem {
    pub names: Vec<String>,
    pub sums: Vec<Vec<usize>>,
    pub equations: Vec<Vec<Monomial>>,
    /// The sum whose value is the generating function of interest.
    pub root: SumId,
}

impl PolynomialSystem {
    pub fn unknowns(&self) -> usize {
        self.equations.len()
    }
}

/// One unknown per live nonterminal; boring ones are the constant 1 and
/// every template becomes `z^weight` times one sum per slot.
pub fn weighted_system(g: &ConfigCfg) -> PolynomialSystem {
    let sk = &*g.skeleton;
    let live: Vec<usize> = (0..sk.nonterminals.len())
        .filter(|&n| sk.nonterminals[n].live)
        .collect();
    let index: HashMap<usize, usize> = live.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut sums: Vec<Vec<usize>> = sk
        .lists
        .iter()
        .map(|l| l.members.iter().map(|m| index[m]).collect())
        .collect();
    let root = sums.len();
    sums.push(sk.start.iter().map(|s| index[s]).collect());
    let equations = live
        .iter()
        .map(|&n| match sk.template(n) {
            None => vec![Monomial {
                z_pow: 0,
                factors: vec![],
            }],
            Some(t) => vec![Monomial {
                z_pow: sk.nonterminals[n].weight,
                factors: t.slots.clone(),
            }],
        })
        .collect();
    PolynomialSystem {
        names: live.iter().map(|&n| sk.name(n)).collect(),
        sums,
        equations,
        root,
    }
}

/// Unknowns with a derivation that contributes to the constant term.
fn zero_derivable(sys: &PolynomialSystem) -> Vec<bool> {
    let mut z = vec![false; sys.unknowns()];
    loop {
        let mut changed = false;
        for (x, eq) in sys.equations.iter().enumerate() {
            if !z[x]
                && eq.iter().any(|m| {
                    m.z_pow == 0 && m.factors.iter().all(|&s| sys.sums[s].iter().any(|&y| z[y]))
                })
            {
                z[x] = true;
                changed = true;
            }
        }
        if !changed {
            return z;
        }
    }
}

/// A derivation cycle that adds no weight lets every coefficient it touches
/// grow without bound. Detected on the equations before iterating.
fn check_weightless_cycles(sys: &PolynomialSystem) -> Result<()> {
    let z = zero_derivable(sys);
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..sys.unknowns()).map(|_| g.add_node(())).collect();
    for (x, eq) in sys.equations.iter().enumerate() {
        for m in eq.iter().filter(|m| m.z_pow == 0) {
            for (k, &s) in m.factors.iter().enumerate() {
                let others_vanish = m
                    .factors
                    .iter()
                    .enumerate()
                    .all(|(j, &o)| j == k || sys.sums[o].iter().any(|&y| z[y]));
                if others_vanish {
                    for &y in &sys.sums[s] {
                        g.update_edge(nodes[x], nodes[y], ());
                    }
                }
            }
        }
    }
    for scc in tarjan_scc(&g) {
        let x = scc[0];
        if scc.len() > 1 || g.contains_edge(x, x) {
            return Err(Error::NonStabilization(format!(
                "{} lies on a weight-0 derivation cycle",
                sys.names[x.index()]
            )));
        }
    }
    Ok(())
}

fn evaluate(sys: &PolynomialSystem, x: usize, sum_vals: &[ExactSeries], n: usize) -> ExactSeries {
    let mut out = ExactSeries::zero(n);
    for m in &sys.equations[x] {
        if m.z_pow > n {
            continue;
        }
        let mut term = ExactSeries::monomial(m.z_pow, n);
        for &s in &m.factors {
            term = term.mul(&sum_vals[s]);
            if term.is_zero() {
                break;
            }
        }
        out.add_assign(&term);
    }
    out
}

fn sum_value(sys: &PolynomialSystem, s: SumId, vals: &[ExactSeries], n: usize) -> ExactSeries {
    let mut out = ExactSeries::zero(n);
    for &y in &sys.sums[s] {
        out.add_assign(&vals[y]);
    }
    out
}

/// Least solution up to `z^n`: strongly connected groups of unknowns in
/// dependency order, each iterated from zero until a sweep changes nothing.
pub fn solve_truncated(
    sys: &PolynomialSystem,
    n: usize,
    limits: &Limits,
) -> Result<Vec<ExactSeries>> {
    check_weightless_cycles(sys)?;
    let k = sys.unknowns();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..k).map(|_| g.add_node(())).collect();
    for (x, eq) in sys.equations.iter().enumerate() {
        for m in eq {
            for &s in &m.factors {
                for &y in &sys.sums[s] {
                    g.update_edge(nodes[x], nodes[y], ());
                }
            }
        }
    }
    let mut sums_of: Vec<Vec<SumId>> = vec![Vec::new(); k];
    for (s, members) in sys.sums.iter().enumerate() {
        for &y in members {
            sums_of[y].push(s);
        }
    }

    let mut vals = vec![ExactSeries::zero(n); k];
    let mut sum_vals = vec![ExactSeries::zero(n); sys.sums.len()];
    // tarjan_scc lists components after everything they depend on
    for scc in tarjan_scc(&g) {
        let members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        let mut sweeps = 0;
        loop {
            let mut changed = false;
            for &x in &members {
                let next = evaluate(sys, x, &sum_vals, n);
                if next != vals[x] {
                    vals[x] = next;
                    for &s in &sums_of[x] {
                        sum_vals[s] = sum_value(sys, s, &vals, n);
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            sweeps += 1;
            if sweeps > limits.max_sweeps {
                return Err(Error::NonStabilization(format!(
                    "{} still changing after {} sweeps",
                    sys.names[members[0]], limits.max_sweeps
                )));
            }
        }
    }
    Ok(vals)
}

/// Value of the root sum after `sweeps` plain Jacobi sweeps from zero.
pub fn kleene_iterate(sys: &PolynomialSystem, n: usize, sweeps: usize) -> ExactSeries {
    let mut vals = vec![ExactSeries::zero(n); sys.unknowns()];
    for _ in 0..sweeps {
        let sum_vals: Vec<_> = (0..sys.sums.len())
            .map(|s| sum_value(sys, s, &vals, n))
            .collect();
        vals = (0..sys.unknowns())
            .map(|x| evaluate(sys, x, &sum_vals, n))
            .collect();
    }
    sum_value(sys, sys.root, &vals, n)
}

pub fn root_series(sys: &PolynomialSystem, vals: &[ExactSeries]) -> ExactSeries {
    let n = vals.first().map_or(0, |v| v.order());
    sum_value(sys, sys.root, vals, n)
}

/// `c_1..c_n` from the grammar pipeline.
pub fn saw_coefficients(
    system: &ConeTypeSystem,
    n: usize,
    limits: &Limits,
) -> Result<Vec<BigUint>> {
    let g = build_config_cfg(system, limits)?;
    let sys = weighted_system(&g);
    let vals = solve_truncated(&sys, n, limits)?;
    let f = sum_value(&sys, sys.root, &vals, n);
    Ok(f.coeffs()[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn coeffs(name: &str, n: usize) -> Vec<u64> {
        let sys = corpus::system(name).unwrap();
        saw_coefficients(&sys, n, &Limits::default())
            .unwrap()
            .iter()
            .map(|c| c.try_into().unwrap())
            .collect()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(coeffs("line", 5), [2, 2, 2, 2, 2]);
        assert_eq!(coeffs("tree3", 4), [3, 6, 12, 24]);
    }

    #[test]
    fn boring_unknowns_are_one() {
        let g = build_config_cfg(&corpus::system("ladder").unwrap(), &Limits::default()).unwrap();
        let sys = weighted_system(&g);
        assert_eq!(sys.unknowns(), g.skeleton.live_count());
        let vals = solve_truncated(&sys, 3, &Limits::default()).unwrap();
        let sk = &g.skeleton;
        let live: Vec<_> = (0..sk.nonterminals.len())
            .filter(|&n| sk.nonterminals[n].live)
            .collect();
        for (i, &nt) in live.iter().enumerate() {
            if sk.nonterminals[nt].boring {
                assert_eq!(vals[i], ExactSeries::one(3));
            }
        }
    }

    fn hand(equations: Vec<Vec<Monomial>>, sums: Vec<Vec<usize>>) -> PolynomialSystem {
        let names = (0..equations.len()).map(|i| format!("X{i}")).collect();
        PolynomialSystem {
            names,
            root: 0,
            sums,
            equations,
        }
    }

    #[test]
    fn weightless_cycles_do_not_stabilize() {
        // A = A
        let sys = hand(
            vec![vec![Monomial {
                z_pow: 0,
                factors: vec![0],
            }]],
            vec![vec![0]],
        );
        assert!(matches!(
            solve_truncated(&sys, 3, &Limits::default()),
            Err(Error::NonStabilization(_))
        ));
        // A = 1 + A
        let sys = hand(
            vec![vec![
                Monomial {
                    z_pow: 0,
                    factors: vec![],
                },
                Monomial {
                    z_pow: 0,
                    factors: vec![0],
                },
            ]],
            vec![vec![0]],
        );
        assert!(matches!(
            solve_truncated(&sys, 3, &Limits::default()),
            Err(Error::NonStabilization(_))
        ));
    }

    #[test]
    fn catalan_system() {
        // A = z + A A
        let sys = hand(
            vec![vec![
                Monomial {
                    z_pow: 1,
                    factors: vec![],
                },
                Monomial {
                    z_pow: 0,
                    factors: vec![0, 0],
                },
            ]],
            vec![vec![0]],
        );
        let v = solve_truncated(&sys, 7, &Limits::default()).unwrap();
        let c: Vec<u64> = v[0]
            .coeffs()
            .iter()
            .map(|c| c.try_into().unwrap())
            .collect();
        assert_eq!(c, [0, 1, 1, 2, 5, 14, 42, 132]);
        assert_eq!(kleene_iterate(&sys, 7, 20), v[0]);
    }

    #[test]
    fn truncation_consistency() {
        let sys = corpus::system("ladder").unwrap();
        let a = saw_coefficients(&sys, 6, &Limits::default()).unwrap();
        let b = saw_coefficients(&sys, 11, &Limits::default()).unwrap();
        assert_eq!(a[..], b[..6]);
    }
}
