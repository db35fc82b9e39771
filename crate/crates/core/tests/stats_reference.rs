//! The hand-rolled t statistics against statrs as an external reference.

use statrs::distribution::{ContinuousCDF, StudentsT};

use attrank::eval;

#[test]
fn incomplete_beta_tracks_statrs_t_cdf() {
    // two-tailed p from our implementation vs 2 * (1 - CDF(|t|)) from statrs
    for dof in [1.0f64, 2.0, 5.0, 9.0, 17.0, 42.0, 166.0] {
        let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
        for t in [0.0f64, 0.1, 0.5, 1.0, 1.96, 2.262, 3.5, 7.0] {
            let ours = eval::student_t_two_tailed_p(t, dof);
            let reference = 2.0 * (1.0 - dist.cdf(t.abs()));
            assert!(
                (ours - reference).abs() < 1e-10,
                "dof={dof}, t={t}: {ours} vs {reference}"
            );
        }
    }
}

#[test]
fn paired_t_matches_statrs_on_a_fixed_sample() {
    let a = [0.82, 0.74, 0.90, 0.61, 0.55, 0.77, 0.68, 0.93, 0.49, 0.71];
    let b = [0.75, 0.70, 0.85, 0.66, 0.50, 0.71, 0.60, 0.90, 0.51, 0.63];
    let result = eval::paired_t_test(&a, &b, 0.05).unwrap();

    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    assert!((result.t - t).abs() < 1e-12);

    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    assert!((result.p - p).abs() < 1e-10, "{} vs {p}", result.p);
}
