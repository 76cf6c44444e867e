use super::SummaryOperator;
use crate::removal::SubsetMask;

const AXIOM_TOL: f64 = 1e-10;

/// Which structural properties an operator satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomReport {
    /// Each row is an average of marginal contributions: entries on subsets
    /// containing `i` are nonnegative and sum to 1, and each is matched by
    /// the opposite entry on the same subset without `i`.
    pub probabilistic: bool,
    /// Relabelling any two features leaves the operator unchanged.
    pub symmetry: bool,
    /// Attributions sum to `v(full) - v(empty)` for every game.
    pub efficiency: bool,
}

pub fn check_axioms(a: &SummaryOperator) -> AxiomReport {
    AxiomReport {
        probabilistic: probabilistic(a),
        symmetry: symmetric(a),
        efficiency: efficient(a),
    }
}

fn probabilistic(a: &SummaryOperator) -> bool {
    let d = a.d();
    (0..d).all(|i| {
        let mut total = 0.0;
        for s in SubsetMask::all(d) {
            if !s.contains(i) {
                continue;
            }
            let pos = a.entry(i, s);
            let neg = a.entry(i, s.without(i));
            if pos < -AXIOM_TOL || (pos + neg).abs() > AXIOM_TOL {
                return false;
            }
            total += pos;
        }
        (total - 1.0).abs() <= AXIOM_TOL
    })
}

fn efficient(a: &SummaryOperator) -> bool {
    let d = a.d();
    let full = SubsetMask::full(d);
    SubsetMask::all(d).all(|s| {
        let col: f64 = (0..d).map(|i| a.entry(i, s)).sum();
        let want = if s == full {
            1.0
        } else if s.is_empty() {
            -1.0
        } else {
            0.0
        };
        (col - want).abs() <= AXIOM_TOL
    })
}

fn swap_bits(s: SubsetMask, i: usize, j: usize) -> SubsetMask {
    match (s.contains(i), s.contains(j)) {
        (true, false) => s.without(i).with(j),
        (false, true) => s.without(j).with(i),
        _ => s,
    }
}

// Adjacent transpositions generate every permutation, so invariance under
// them is equivalent to invariance under all feature relabellings.
fn symmetric(a: &SummaryOperator) -> bool {
    let d = a.d();
    (0..d.saturating_sub(1)).all(|i| {
        let j = i + 1;
        (0..d).all(|row| {
            let row_swapped = if row == i {
                j
            } else if row == j {
                i
            } else {
                row
            };
            SubsetMask::all(d).all(|s| {
                (a.entry(row, s) - a.entry(row_swapped, swap_bits(s, i, j))).abs() <= AXIOM_TOL
            })
        })
    })
}
