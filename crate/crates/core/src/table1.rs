//! Published reference values for exponential planted weights.
//!
//! Each row holds `μ` followed by the tree overlap, tree mean weight, path
//! overlap and path mean weight.

use serde::Serialize;

use crate::instance::PlantedKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub mu: f64,
    pub tree_overlap: f64,
    pub tree_weight: f64,
    pub path_overlap: f64,
    pub path_weight: f64,
}

impl ReferenceRow {
    pub fn overlap(&self, kind: PlantedKind) -> Option<f64> {
        match kind {
            PlantedKind::Tree => Some(self.tree_overlap),
            PlantedKind::Path => Some(self.path_overlap),
            PlantedKind::Null => None,
        }
    }

    pub fn weight(&self, kind: PlantedKind) -> Option<f64> {
        match kind {
            PlantedKind::Tree => Some(self.tree_weight),
            PlantedKind::Path => Some(self.path_weight),
            PlantedKind::Null => None,
        }
    }
}

const fn row(mu: f64, to: f64, tw: f64, po: f64, pw: f64) -> ReferenceRow {
    ReferenceRow {
        mu,
        tree_overlap: to,
        tree_weight: tw,
        path_overlap: po,
        path_weight: pw,
    }
}

pub const REFERENCE_ROWS: [ReferenceRow; 17] = [
    row(0.089667, 0.913074, 0.076304, 0.906252, 0.072267),
    row(0.311334, 0.789809, 0.213841, 0.788253, 0.200390),
    row(0.402602, 0.752422, 0.258459, 0.753049, 0.242444),
    row(4.418627, 0.282288, 0.852414, 0.289205, 0.840914),
    row(8.434651, 0.178754, 0.982680, 0.182270, 0.977254),
    row(12.852277, 0.127802, 1.045965, 0.129785, 1.043005),
    row(17.269904, 0.099549, 1.080776, 0.100813, 1.078922),
    row(21.285928, 0.082916, 1.101167, 0.083818, 1.099858),
    row(25.703554, 0.070054, 1.116881, 0.070712, 1.115934),
    row(30.121181, 0.060652, 1.128336, 0.061152, 1.127620),
    row(34.137205, 0.054059, 1.136353, 0.054460, 1.135781),
    row(38.554831, 0.048287, 1.143361, 0.048610, 1.142902),
    row(42.972458, 0.043629, 1.149008, 0.043895, 1.148632),
    row(46.988482, 0.040112, 1.153268, 0.040338, 1.152948),
    row(51.406108, 0.036845, 1.157220, 0.037037, 1.156950),
    row(55.823735, 0.034071, 1.160575, 0.034235, 1.160343),
    row(59.839759, 0.031888, 1.163212, 0.032033, 1.163009),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_ordered_and_monotone() {
        for w in REFERENCE_ROWS.windows(2) {
            assert!(w[0].mu < w[1].mu);
            assert!(w[0].tree_overlap > w[1].tree_overlap);
            assert!(w[0].path_overlap > w[1].path_overlap);
            assert!(w[0].tree_weight < w[1].tree_weight);
            assert!(w[0].path_weight < w[1].path_weight);
        }
        assert!(REFERENCE_ROWS.iter().all(|r| r.tree_weight < crate::theory::ZETA3));
    }
}
