//! Accuracy figures on crafted and random confusion matrices.

use parcelsense::eval::{accuracy_report, ConfusionMatrix};
use parcelsense::geodata::LandUseLabel::{self, *};
use proptest::prelude::*;

fn report(counts: Vec<Vec<u64>>, classes: &[LandUseLabel]) -> parcelsense::AccuracyReport {
    accuracy_report(&ConfusionMatrix::from_counts(classes.to_vec(), counts).unwrap()).unwrap()
}

#[test]
fn crafted_matrices() {
    let r = report(vec![vec![50, 0], vec![0, 50]], &[R, C]);
    assert_eq!((r.overall_accuracy, r.kappa), (1.0, 1.0));
    let r = report(vec![vec![25, 25], vec![25, 25]], &[R, C]);
    assert_eq!((r.overall_accuracy, r.kappa), (0.5, 0.0));
}

#[test]
fn hand_computed_three_class() {
    // p_o = 0.65, p_e = (0.4*0.5 + 0.3*0.3 + 0.3*0.2) = 0.35
    let r = report(vec![vec![30, 5, 5], vec![10, 20, 0], vec![10, 5, 15]], &[M, I, G]);
    assert!((r.overall_accuracy - 0.65).abs() < 1e-12);
    assert!((r.expected_agreement - 0.35).abs() < 1e-12);
    assert!((r.kappa - (0.65 - 0.35) / 0.65).abs() < 1e-12);
}

proptest! {
    #[test]
    fn complement_identities(cells in prop::collection::vec(0u64..20, 49)) {
        prop_assume!(cells.iter().sum::<u64>() > 0);
        let counts: Vec<Vec<u64>> = cells.chunks(7).map(|c| c.to_vec()).collect();
        let r = report(counts.clone(), &LandUseLabel::ALL);
        let n: u64 = cells.iter().sum();
        let trace: u64 = (0..7).map(|i| counts[i][i]).sum();
        prop_assert!((r.overall_accuracy - trace as f64 / n as f64).abs() < 1e-12);
        for (i, c) in r.per_class.iter().enumerate() {
            let row: u64 = counts[i].iter().sum();
            let col: u64 = counts.iter().map(|r| r[i]).sum();
            prop_assert_eq!(c.producer_accuracy.is_some(), row > 0);
            prop_assert_eq!(c.user_accuracy.is_some(), col > 0);
            if let (Some(pa), Some(om)) = (c.producer_accuracy, c.omission) {
                prop_assert!((pa - (1.0 - om)).abs() < 1e-12);
                prop_assert!((pa - counts[i][i] as f64 / row as f64).abs() < 1e-12);
            }
            if let (Some(ua), Some(co)) = (c.user_accuracy, c.commission) {
                prop_assert!((ua - (1.0 - co)).abs() < 1e-12);
                prop_assert!((ua - counts[i][i] as f64 / col as f64).abs() < 1e-12);
            }
        }
        prop_assert!(r.kappa <= 1.0 + 1e-12);
    }
}
