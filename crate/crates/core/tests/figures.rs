use pade_spect::figures::{exact_points, figure, figure4, fit_quadratic, gallas_points, FIT_MAX_Q};

fn csv_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn figure5_holds_the_seven_lowest_barriers() {
    let data = figure(5).unwrap();
    let lines = &data.files[1];
    assert_eq!(lines.name, "figure5_lines.csv");
    let mut betas: Vec<f64> = csv_rows(&lines.csv).iter().map(|r| r[3].parse().unwrap()).collect();
    betas.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = exact_points(FIT_MAX_Q).unwrap().iter().map(|s| s.potential.beta).collect();
    all.sort_by(f64::total_cmp);
    assert_eq!(betas, all[..7]);
    assert!((betas[0] - 6.0).abs() < 1e-12);
    let sweep = csv_rows(&data.files[0].csv);
    assert_eq!(sweep.len(), 49);
}

#[test]
fn even_ground_family_fits_a_quadratic() {
    let data = figure4(FIT_MAX_Q).unwrap();
    let rows = csv_rows(&data.files[0].csv);
    let even_ground = rows.iter().find(|r| r[0] == "even" && r[1] == "ground state").unwrap();
    let rms: f64 = even_ground[5].parse().unwrap();
    assert!(rms <= 0.02, "{rms}");
    assert_eq!(even_ground[6], "4");
    // Families with a single member are reported, not fitted.
    assert!(data.notes.iter().any(|n| n.contains("at least 3")), "{:?}", data.notes);
}

#[test]
fn single_point_fit_is_refused() {
    let e = fit_quadratic(&[(5.0, 6.0)]).unwrap_err();
    assert_eq!(e.to_string(), "invalid parameter: quadratic fit needs at least 3 distinct energies, got 1");
}

#[test]
fn gallas_lines_grow_in_q() {
    let pts = gallas_points(&exact_points(6).unwrap());
    assert_eq!(pts.len(), 2 * (1..=7).sum::<usize>());
    for w in pts.windows(2) {
        if w[0].parity == w[1].parity && w[0].line == w[1].line {
            assert_eq!(w[1].q, w[0].q + 1);
            assert!(w[1].energy > w[0].energy);
        }
    }
    let figure6 = figure(6).unwrap();
    assert_eq!(csv_rows(&figure6.files[0].csv).len(), pts.len());
}

#[test]
fn figure1_sweep_shape() {
    let data = figure(1).unwrap();
    let rows = csv_rows(&data.files[0].csv);
    assert_eq!(rows.len(), 51 * 4);
    assert_eq!(rows[0], ["0", "0", "1"]);
    for r in rows.chunks(4) {
        let e: Vec<f64> = r.iter().map(|x| x[2].parse().unwrap()).collect();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }
}
