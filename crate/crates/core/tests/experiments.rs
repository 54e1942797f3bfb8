use iosnoma::config::RunConfig;
use iosnoma::experiment::{
    format_float, render_csv, run_rate_vs_n, run_rgm_vs_power, run_single, run_validate, Cell,
    RATE_VS_N_COLUMNS, RGM_VS_POWER_COLUMNS,
};
use iosnoma::rates::HardwareQuality;

fn small_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.mc.trials = 500;
    cfg.rate_vs_n.n_elements = vec![4, 16, 64];
    cfg.rgm_vs_power.rho_db = vec![0.0, 30.0, 60.0];
    cfg
}

#[test]
fn floats_print_twelve_significant_digits() {
    assert_eq!(format_float(1.0), "1.00000000000e0");
    assert_eq!(format_float(-0.000123456789012345), "-1.23456789012e-4");
    assert_eq!(format_float(f64::INFINITY), "inf");
    assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    assert_eq!(format_float(f64::NAN), "nan");
    // Round trip is exact to twelve digits.
    let x = 1.234_567_890_123_456_7;
    let back: f64 = format_float(x).parse().unwrap();
    assert!((back - x).abs() < 1e-11 * x);
}

#[test]
fn rate_vs_n_rows_follow_the_sweep() {
    let cfg = small_config();
    let t = run_rate_vs_n(&cfg).unwrap();
    assert_eq!(t.columns, RATE_VS_N_COLUMNS.to_vec());
    assert_eq!(t.rows.len(), 3 * 4);
    let n = t.column("n").unwrap();
    let ns: Vec<_> = t.rows.iter().map(|r| r[n].clone()).collect();
    assert_eq!(ns[0], Cell::Int(4));
    assert_eq!(ns[11], Cell::Int(64));
    let scheme = t.column("scheme").unwrap();
    assert_eq!(t.rows[2][scheme], Cell::Text("oma"));
}

#[test]
fn rgm_vs_power_orders_by_panel_then_power() {
    let cfg = small_config();
    let t = run_rgm_vs_power(&cfg).unwrap();
    assert_eq!(t.columns, RGM_VS_POWER_COLUMNS.to_vec());
    assert_eq!(t.rows.len(), 3 * 3 * 2);
    let (eps, rho) = (t.column("eps").unwrap(), t.column("rho_db").unwrap());
    assert_eq!(t.rows[0][eps], Cell::Float(1.0));
    assert_eq!(t.rows[2][rho], Cell::Float(30.0));
    assert_eq!(t.rows[6][eps], Cell::Float(0.9999));
}

#[test]
fn csv_embeds_a_config_that_reproduces_it() {
    let mut cfg = small_config();
    cfg.mc.seed = 4242;
    let csv = render_csv("rate-vs-n", &cfg, &run_rate_vs_n(&cfg).unwrap());
    assert!(csv.starts_with("# tool: iosnoma "));
    assert!(csv.contains("# seed: 4242\n"));
    assert!(csv.contains(&format!("# scenario_sha256: {}\n", cfg.scenario_digest())));
    let back = RunConfig::from_text(&csv).unwrap();
    assert_eq!(back, cfg);
    let again = render_csv("rate-vs-n", &back, &run_rate_vs_n(&back).unwrap());
    assert_eq!(again, csv);
}

#[test]
fn single_report_echoes_config_and_marks_unbounded_limits() {
    let cfg = small_config();
    let report = run_single(&cfg, true).unwrap();
    assert_eq!(report["seed"], cfg.mc.seed);
    assert_eq!(report["config"]["monte_carlo"]["trials"], 500);
    assert_eq!(report["asymptotics"]["rho_to_infinity"][0], "inf");
    assert!(
        report["monte_carlo"]["noma"]["r1"]["mean"]
            .as_f64()
            .unwrap()
            > 0.0
    );

    let mut impaired = cfg.clone();
    impaired.scenario.hq = HardwareQuality::uniform(0.99);
    let report = run_single(&impaired, false).unwrap();
    assert!(report["asymptotics"]["rho_to_infinity"][0]
        .as_f64()
        .is_some());
    assert!(report.get("monte_carlo").is_none());
}

#[test]
fn single_element_rayleigh_report_is_a_numerical_failure() {
    let mut cfg = small_config();
    cfg.scenario = cfg.scenario.with_grid(1, 1);
    let err = run_single(&cfg, false).unwrap_err();
    assert!(err.is_numerical(), "{err}");
}

#[test]
fn validate_passes_on_defaults() {
    let mut cfg = RunConfig::default();
    cfg.mc.trials = 4000;
    let checks = run_validate(&cfg).unwrap();
    assert!(checks.len() >= 15);
    for c in &checks {
        assert!(c.passed, "{c}");
    }
}
