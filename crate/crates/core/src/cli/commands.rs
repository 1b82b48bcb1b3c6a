use std::collections::BTreeMap;

use super::config::{Angle, Config, PredictorKind};
use super::csv::{num, opt_num, Table};
use crate::analytic::{self, Visibility};
use crate::bell::{
    self, ch_statistic, ch_statistic_monte_carlo, optimize_angles, BellResult, EberhardPredictor, EfficiencyScaled,
    MonteCarloPredictor, VisibilityPredictor,
};
use crate::error::{Error, Result};
use crate::montecarlo::{PreselectionPattern, PrimePattern, Simulator, Tally};
use crate::optics::{AnalyzerSetting, BeamSplitterSpec};

/// Grid axes and their defaults. Angles are degrees.
const PARAMS: [(&str, f64); 10] = [
    ("theta10", 0.0),
    ("theta20", 0.0),
    ("theta1", 0.0),
    ("theta2", 0.0),
    ("theta1p", 0.0),
    ("theta2p", 0.0),
    ("phi_deg", 0.0),
    ("v", 1.0),
    ("r", 1.0),
    ("width_over_spacing", 0.0),
];

type Eval = fn(&Args, &BeamSplitterSpec) -> Result<f64>;

/// Closed forms reachable from the `analytic` command, with the grid axes
/// each accepts. Settings listed in `removable` may be `"removed"`.
struct Formula {
    id: &'static str,
    params: &'static [&'static str],
    removable: &'static [&'static str],
    eval: Eval,
}

struct Args(BTreeMap<&'static str, Angle>);

impl Args {
    fn setting(&self, name: &str) -> AnalyzerSetting {
        match self.0[name] {
            Angle::Degrees(d) => AnalyzerSetting::degrees(d),
            Angle::Keyword(_) => AnalyzerSetting::Removed,
        }
    }

    fn value(&self, name: &str) -> f64 {
        match self.0[name] {
            Angle::Degrees(d) => d,
            Angle::Keyword(_) => unreachable!("checked when the grid is expanded"),
        }
    }

    fn rad(&self, name: &str) -> f64 {
        self.value(name).to_radians()
    }

    fn visibility(&self) -> Result<Visibility> {
        Visibility::new(self.value("v"))
    }
}

const FORMULAS: &[Formula] = &[
    Formula {
        id: "prob2_opposite",
        params: &["theta10", "theta20", "theta1", "theta2", "phi_deg"],
        removable: &["theta10", "theta20", "theta1", "theta2"],
        eval: |a, bs| {
            Ok(analytic::prob2(a.setting("theta10"), a.setting("theta20"), a.setting("theta1"), a.setting("theta2"), bs, a.rad("phi_deg")))
        },
    },
    Formula {
        id: "prob2_same_side",
        params: &["theta10", "theta20"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob2_same_side(a.rad("theta10"), a.rad("theta20"))),
    },
    Formula {
        id: "prob2_unpolarized_out",
        params: &["theta10", "theta20"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob2_unpolarized_out(a.rad("theta10"), a.rad("theta20"))),
    },
    Formula {
        id: "prob2_unpolarized_in",
        params: &["theta1", "theta2"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob2_unpolarized_in(a.rad("theta1"), a.rad("theta2"))),
    },
    Formula {
        id: "prob2_one_arm",
        params: &["theta10", "theta20", "theta1", "theta2"],
        removable: &["theta10", "theta20"],
        eval: |a, _| Ok(analytic::prob2_one_arm(a.setting("theta10"), a.setting("theta20"), a.rad("theta1"), a.rad("theta2"))),
    },
    Formula {
        id: "prob2_one_arm_unpolarized",
        params: &["theta1", "theta2"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob2_one_arm_unpolarized(a.rad("theta1"), a.rad("theta2"))),
    },
    Formula {
        id: "prob4",
        params: &["theta1p", "theta2p", "theta1", "theta2", "phi_deg", "v"],
        removable: &["theta1p", "theta2p", "theta1", "theta2"],
        eval: |a, bs| {
            Ok(analytic::prob4(
                a.setting("theta1p"),
                a.setting("theta2p"),
                a.setting("theta1"),
                a.setting("theta2"),
                bs,
                a.rad("phi_deg"),
                a.visibility()?,
            ))
        },
    },
    Formula {
        id: "prob4_factorized",
        params: &["theta1p", "theta2p", "theta1", "theta2"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob4_factorized(a.rad("theta1p"), a.rad("theta2p"), a.rad("theta1"), a.rad("theta2"))),
    },
    Formula {
        id: "prob4_removed",
        params: &["theta1p", "theta2p", "v"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob4_removed(a.rad("theta1p"), a.rad("theta2p"), a.visibility()?)),
    },
    Formula {
        id: "prob4_one_arm",
        params: &["theta1p", "theta2p", "theta1", "theta2"],
        removable: &["theta1", "theta2"],
        eval: |a, _| Ok(analytic::prob4_one_arm(a.rad("theta1p"), a.rad("theta2p"), a.setting("theta1"), a.setting("theta2"))),
    },
    Formula {
        id: "prob4_one_arm_nopol",
        params: &["theta1p", "theta2p"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob4_one_arm_nopol(a.rad("theta1p"), a.rad("theta2p"))),
    },
    Formula {
        id: "prob4_triplet",
        params: &["theta1p", "theta2p"],
        removable: &[],
        eval: |a, _| Ok(analytic::prob4_triplet(a.rad("theta1p"), a.rad("theta2p"))),
    },
    Formula {
        id: "eberhard_prob",
        params: &["theta1p", "theta2p", "r"],
        removable: &[],
        eval: |a, _| Ok(analytic::eberhard_prob(a.rad("theta1p"), a.rad("theta2p"), a.value("r"))),
    },
    Formula {
        id: "visibility_geometry",
        params: &["width_over_spacing"],
        removable: &[],
        eval: |a, _| analytic::visibility_from_geometry(a.value("width_over_spacing"), 1.0),
    },
];

pub fn formula_ids() -> impl Iterator<Item = &'static str> {
    FORMULAS.iter().map(|f| f.id)
}

fn render_param(value: Option<&Angle>) -> String {
    match value {
        None => String::new(),
        Some(Angle::Degrees(d)) => format!("{d}"),
        Some(Angle::Keyword(_)) => "removed".to_owned(),
    }
}

/// Grid points in row-major order over the formula's parameter list.
fn expand(formula: &Formula, grid: &BTreeMap<String, Vec<Angle>>, index: usize) -> Result<Vec<Args>> {
    let field = |name: &str| format!("run.analytic[{index}].grid.{name}");
    for (name, values) in grid {
        if !formula.params.contains(&name.as_str()) {
            return Err(Error::Config(format!(
                "{}: formula {} takes {:?}",
                field(name),
                formula.id,
                formula.params
            )));
        }
        for v in values {
            match v {
                Angle::Keyword(_) if !formula.removable.contains(&name.as_str()) => {
                    return Err(Error::Config(format!("{}: \"removed\" is not allowed here", field(name))));
                }
                Angle::Degrees(d) if !d.is_finite() => {
                    return Err(Error::Config(format!("{}: {d} is not finite", field(name))));
                }
                _ => {}
            }
        }
    }
    if grid.is_empty() || grid.values().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    let mut points = vec![BTreeMap::new()];
    for &name in formula.params {
        let (_, default) = PARAMS.iter().find(|p| p.0 == name).expect("parameter is catalogued");
        let values = grid.get(name).cloned().unwrap_or_else(|| vec![Angle::Degrees(*default)]);
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name, *v);
                    q
                })
            })
            .collect();
    }
    Ok(points.into_iter().map(Args).collect())
}

/// One row per requested formula and grid point.
pub fn analytic(config: &Config) -> Result<Vec<Table>> {
    let bs = config.experiment.splitter()?;
    let mut columns = vec!["formula"];
    columns.extend(PARAMS.iter().map(|p| p.0));
    columns.push("value");
    let mut table = Table::new("analytic", &columns);
    for (i, request) in config.run.analytic.iter().enumerate() {
        let formula = FORMULAS.iter().find(|f| f.id == request.formula).ok_or_else(|| {
            Error::Config(format!(
                "run.analytic[{i}].formula: unknown formula {:?}; known: {:?}",
                request.formula,
                formula_ids().collect::<Vec<_>>()
            ))
        })?;
        for args in expand(formula, &request.grid, i)? {
            let value = (formula.eval)(&args, &bs).map_err(|e| Error::Config(format!("run.analytic[{i}]: {e}")))?;
            let mut row = vec![formula.id.to_owned()];
            row.extend(PARAMS.iter().map(|p| render_param(args.0.get(p.0))));
            row.push(num(value));
            table.push(row);
        }
    }
    Ok(vec![table])
}

/// Raw counts, estimators and rates of one Monte Carlo run.
pub fn simulate(config: &Config) -> Result<Vec<Table>> {
    let tally = Simulator::new(&config.experiment_config()?)?.run()?;
    simulation_tables(&tally)
}

pub fn simulation_tables(tally: &Tally) -> Result<Vec<Table>> {
    let mut counts = Table::new("counts", &["preselection", "prime", "count"]);
    for pre in PreselectionPattern::ALL {
        for prime in PrimePattern::ALL {
            counts.push(vec![pre.label().into(), prime.label().into(), tally.count_given(pre, prime).to_string()]);
        }
    }

    let mut estimates = Table::new(
        "estimates",
        &["prime", "count", "frequency", "standard_error", "estimate_p", "estimate_p_standard_error"],
    );
    for prime in PrimePattern::ALL {
        let se = tally.standard_error(prime)?;
        estimates.push(vec![
            prime.label().into(),
            tally.count(prime).to_string(),
            num(tally.frequency(prime)?),
            num(se),
            num(tally.estimate_p(prime)?),
            num(se / 4.0),
        ]);
    }

    let mut conditional =
        Table::new("conditional", &["preselection", "prime", "count", "conditional_frequency", "standard_error"]);
    for pre in PreselectionPattern::ALL {
        if tally.accepted_given(pre) == 0 {
            continue;
        }
        for prime in PrimePattern::ALL {
            conditional.push(vec![
                pre.label().into(),
                prime.label().into(),
                tally.count_given(pre, prime).to_string(),
                num(tally.conditional_frequency(pre, prime)?),
                num(tally.conditional_standard_error(pre, prime)?),
            ]);
        }
    }

    let mut rates = Table::new("rates", &["quantity", "count", "value", "standard_error"]);
    let count_row = |name: &str, n: u64| vec![name.to_owned(), n.to_string(), String::new(), String::new()];
    rates.push(count_row("trials", tally.n_trials));
    rates.push(count_row("gate_opened", tally.n_gate_opened));
    rates.push(count_row("discarded", tally.n_discarded));
    rates.push(count_row("accepted", tally.accepted()));
    rates.push(vec![
        "gate_open_rate".into(),
        String::new(),
        num(tally.gate_open_rate()?),
        num(tally.gate_open_standard_error()?),
    ]);
    let kept = tally.accepted() as f64 / tally.n_gate_opened as f64;
    rates.push(vec![
        "accepted_fraction_of_gate".into(),
        String::new(),
        num(kept),
        num(crate::montecarlo::binomial_se(kept, tally.n_gate_opened)),
    ]);
    Ok(vec![counts, estimates, conditional, rates])
}

fn bell_row(predictor: &str, convention: &str, result: &BellResult) -> Vec<String> {
    let q = result.quadruple;
    let mut row = vec![
        predictor.to_owned(),
        convention.to_owned(),
        opt_num(result.inputs.v),
        opt_num(result.inputs.eta),
        opt_num(result.inputs.r),
    ];
    row.extend([q.a, q.a2, q.b, q.b2].map(|t| num(t.to_degrees())));
    row.extend(result.terms.as_array().map(num));
    row.push(num(result.s));
    row.push(num(result.standard_error));
    row
}

/// CH statistic at the configured quadruple, or maximized over angles when
/// none is given.
pub fn bell(config: &Config) -> Result<Vec<Table>> {
    let b = &config.run.bell;
    let mut table = Table::new(
        "bell",
        &[
            "predictor", "convention", "v", "eta", "r", "a_deg", "a2_deg", "b_deg", "b2_deg", "p_ab", "p_ab2",
            "p_a2b2", "p_a2b", "p_a2_inf", "p_inf_b", "s", "s_standard_error",
        ],
    );
    let check = |name: &str, x: f64| {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(Error::Config(format!("run.bell.{name} = {x} outside [0, 1]")))
        }
    };
    check("v", b.v)?;
    check("eta", b.eta)?;
    if !(b.r.is_finite() && b.r >= 0.0) {
        return Err(Error::Config(format!("run.bell.r = {} must be non-negative", b.r)));
    }
    let search = b.search()?;
    let quadruple = config.bell_quadruple();
    let evaluate = |p: &dyn bell::JointProbability| match quadruple {
        Some(q) => ch_statistic(p, q),
        None => optimize_angles(p, search),
    };
    let (name, convention, result) = match b.predictor {
        PredictorKind::Visibility => {
            let p = EfficiencyScaled { inner: VisibilityPredictor { v: b.v, convention: b.convention }, eta: b.eta };
            ("visibility", b.convention.label(), evaluate(&p)?)
        }
        PredictorKind::Eberhard => {
            let p = EfficiencyScaled { inner: EberhardPredictor { r: b.r, v: b.v }, eta: b.eta };
            ("eberhard", "cross_term", evaluate(&p)?)
        }
        PredictorKind::MonteCarlo => {
            let q = quadruple.ok_or_else(|| {
                Error::Config("angles.bell: the monte_carlo predictor needs an explicit quadruple".into())
            })?;
            let p = MonteCarloPredictor { base: config.experiment_config()? };
            ("monte_carlo", "simulated", ch_statistic_monte_carlo(&p, q)?)
        }
    };
    table.push(bell_row(name, convention, &result));
    Ok(vec![table])
}

/// Efficiency thresholds against visibility, and the unequal-superposition scan.
pub fn scan(config: &Config) -> Result<Vec<Table>> {
    let s = &config.run.scan;
    for &v in &s.visibilities {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Config(format!("run.scan.visibilities: {v} outside (0, 1]")));
        }
    }
    if !(s.eberhard_visibility > 0.0 && s.eberhard_visibility <= 1.0) {
        return Err(Error::Config(format!("run.scan.eberhard_visibility = {} outside (0, 1]", s.eberhard_visibility)));
    }
    for &r in &s.r_values {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Config(format!("run.scan.r_values: {r} must be non-negative")));
        }
    }
    let mut thresholds = Table::new("thresholds", &["v", "convention", "closed_form", "eta_min"]);
    for row in bell::threshold_scan(&s.visibilities, s.search()?)? {
        thresholds.push(vec![num(row.v), row.convention.label().into(), num(row.closed_form), opt_num(row.eta_min)]);
    }
    let mut eberhard = Table::new("eberhard", &["r", "transmittance_x", "visibility", "s_max", "eta_min"]);
    for row in bell::eberhard_scan(&s.r_values, s.eberhard_visibility, s.eberhard_search()?)? {
        eberhard.push(vec![
            num(row.r),
            num(row.transmittance_x),
            num(s.eberhard_visibility),
            num(row.s_max),
            opt_num(row.eta_min),
        ]);
    }
    Ok(vec![thresholds, eberhard])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(table: &Table, name: &str) -> Vec<f64> {
        let i = table.columns.iter().position(|c| c == name).unwrap();
        table.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    #[test]
    fn factorized_form_over_a_grid() {
        let c = Config::from_json(
            r#"{"run": {"analytic": [{"formula": "prob4_factorized",
                "grid": {"theta1p": [0], "theta2p": [0, 45, 90], "theta1": [0], "theta2": [90]}}]}}"#,
        )
        .unwrap();
        let t = &analytic(&c).unwrap()[0];
        let v = column(t, "value");
        assert_eq!(v.len(), 3);
        for (got, want) in v.iter().zip([0.0, 1.0 / 32.0, 1.0 / 16.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let c = Config::from_json(r#"{"run": {"analytic": [{"formula": "prob4_triplet", "grid": {}}]}}"#).unwrap();
        assert!(analytic(&c).unwrap()[0].rows.is_empty());
    }

    #[test]
    fn visibility_geometry_values() {
        let c = Config::from_json(
            r#"{"run": {"analytic": [{"formula": "visibility_geometry", "grid": {"width_over_spacing": [0, 0.5, 1]}}]}}"#,
        )
        .unwrap();
        let v = column(&analytic(&c).unwrap()[0], "value");
        for (got, want) in v.iter().zip([1.0, 0.405_284_734_569_351, 0.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn bad_requests_are_config_errors() {
        for text in [
            r#"{"run": {"analytic": [{"formula": "prob9"}]}}"#,
            r#"{"run": {"analytic": [{"formula": "prob4_triplet", "grid": {"theta9": [1]}}]}}"#,
            r#"{"run": {"analytic": [{"formula": "prob4_triplet", "grid": {"theta1p": ["removed"]}}]}}"#,
            r#"{"run": {"analytic": [{"formula": "prob4_removed", "grid": {"v": [1.5]}}]}}"#,
        ] {
            let c = Config::from_json(text).unwrap();
            assert!(matches!(analytic(&c), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn removed_settings_are_summed() {
        let c = Config::from_json(
            r#"{"run": {"analytic": [{"formula": "prob4",
                "grid": {"theta1p": [0], "theta2p": [90], "theta1": ["removed"], "theta2": ["removed"]}}]}}"#,
        )
        .unwrap();
        let v = column(&analytic(&c).unwrap()[0], "value");
        assert!((v[0] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn bell_defaults_optimize_the_singlet() {
        let c = Config::from_json(r#"{"run": {"bell": {"grid_step_deg": 1.0}}}"#).unwrap();
        let t = &bell(&c).unwrap()[0];
        assert!((column(t, "s")[0] - 0.207_106_781).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_bell_requires_quadruple() {
        let c = Config::from_json(r#"{"run": {"bell": {"predictor": "monte_carlo"}}}"#).unwrap();
        assert!(matches!(bell(&c), Err(Error::Config(_))));
    }
}
