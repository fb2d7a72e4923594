use std::fs;
use std::path::Path;

use entfilter::analysis::{
    assumption_check_with, process_report, table_fidelity, ProcessReport, TruthTable,
    DEFAULT_ASSUMPTION_THRESHOLD,
};
use entfilter::elements::DetectorModel;
use entfilter::engine::{output_density_matrix, simulate_heralded};
use entfilter::filter::{build_filter_circuit, heralded_map, HeraldedMap, Z_LABELS};
use entfilter::format::{parse_circuit, parse_photons, serialize_circuit};
use entfilter::noise::{background_double_pair_with, simulate_noisy_truth_tables_with};
use entfilter::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Deserialize;

use crate::report::{Cell, Report};
use crate::RunConfig;

/// Measured fidelities quoted as an external comparison, never as output.
const REFERENCE_FIDELITIES: [f64; 3] = [0.80, 0.68, 0.60];

pub fn herald_map(cfg: &RunConfig) -> Result<Report> {
    let hc = build_filter_circuit(cfg.variant);
    let m = heralded_map(&hc.circuit, &hc.herald)?;
    let mut r = Report::new("herald-map");
    r.text("variant", cfg.variant.to_string());
    r.table(
        "map",
        Z_LABELS,
        Z_LABELS,
        (0..4)
            .map(|i| (0..4).map(|j| Cell::Complex(m.matrix[(i, j)])).collect())
            .collect(),
    );
    r.table(
        "success",
        Z_LABELS,
        ["probability"],
        m.success.iter().map(|&p| vec![Cell::Real(p)]).collect(),
    );
    r.real("max_deviation", m.max_deviation(&HeraldedMap::ideal()));
    r.note("deviation is measured against diag(1/4, 0, 0, -1/4)");
    Ok(r)
}

fn table_cells(t: &TruthTable) -> Vec<Vec<Cell>> {
    t.values
        .iter()
        .map(|row| row.iter().map(|&v| Cell::Real(v)).collect())
        .collect()
}

fn count_cells(t: &TruthTable) -> Vec<Vec<Cell>> {
    t.values
        .iter()
        .map(|row| row.iter().map(|&v| Cell::Int(v as u64)).collect())
        .collect()
}

fn push_table(r: &mut Report, name: &str, t: &TruthTable, counts: bool) {
    let cells = if counts {
        count_cells(t)
    } else {
        table_cells(t)
    };
    r.table(name, t.in_basis.labels(), t.out_basis.labels(), cells);
}

fn push_process(r: &mut Report, p: &ProcessReport) {
    for (k, v) in [
        ("F_p", p.f_p),
        ("C", p.c),
        ("eta_zz", p.eta_zz),
        ("eta_xy", p.eta_xy),
        ("eta_xx", p.eta_xx),
    ] {
        r.real(k, v);
    }
    for w in &p.warnings {
        r.note(format!("warning: {w}"));
    }
}

fn sample_counts(t: &TruthTable, scale: f64, rng: &mut ChaCha8Rng) -> Result<TruthTable> {
    let mut counts = [[0u64; 4]; 4];
    for (row, probs) in counts.iter_mut().zip(&t.values) {
        for (c, &p) in row.iter_mut().zip(probs) {
            let mean = p * scale;
            *c = if mean > 0.0 {
                let d = Poisson::new(mean)
                    .map_err(|e| Error::Validation(format!("poisson mean {mean}: {e}")))?;
                d.sample(rng) as u64
            } else {
                0
            };
        }
    }
    Ok(TruthTable::from_counts(t.in_basis, t.out_basis, counts))
}

pub fn truth_tables(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.visibilities()?;
    let hc = build_filter_circuit(cfg.variant);
    let tables = simulate_noisy_truth_tables_with(&hc, &params)?;
    let f = tables.fidelities()?;

    let mut r = Report::new("truth-tables");
    r.text("variant", cfg.variant.to_string());
    r.real("v_same", params.v_same);
    r.real("v_cross", params.v_cross);
    let names = ["Z->Z", "X->Y", "X->X"];
    for (name, t) in names.iter().zip(tables.tables()) {
        push_table(&mut r, name, t, false);
    }
    r.table(
        "fidelities",
        names,
        ["simulated", "measured_reference"],
        f.iter()
            .zip(REFERENCE_FIDELITIES)
            .map(|(&s, m)| vec![Cell::Real(s), Cell::Real(m)])
            .collect(),
    );
    r.note("measured_reference values are external experimental figures, not simulator output");
    push_process(&mut r, &process_report(f[0], f[1], f[2])?);
    let check = assumption_check_with(&tables.zz, DEFAULT_ASSUMPTION_THRESHOLD);
    r.real("polarization_change_fraction", check.fraction);
    r.text("polarization_preserving", check.valid.to_string());

    if let Some(duration) = cfg.counts {
        let scale = cfg.pair_rate * duration;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        r.real("count_duration_s", duration);
        r.real("pair_rate_per_s", cfg.pair_rate);
        r.value("seed", Cell::Int(cfg.seed));
        let mut counted = Vec::new();
        for (name, t) in names.iter().zip(tables.tables()) {
            let c = sample_counts(t, scale, &mut rng)?;
            push_table(&mut r, &format!("{name} counts"), &c, true);
            counted.push(c);
        }
        let fc: Vec<Cell> = counted
            .iter()
            .map(|t| {
                table_fidelity(t)
                    .map(Cell::Real)
                    .unwrap_or(Cell::Text("undefined".into()))
            })
            .collect();
        r.table(
            "count_fidelities",
            names,
            ["from_counts"],
            fc.into_iter().map(|c| vec![c]).collect(),
        );
    }
    Ok(r)
}

#[derive(Debug, Deserialize)]
struct TablesFile {
    zz: [[f64; 4]; 4],
    xy: [[f64; 4]; 4],
    xx: [[f64; 4]; 4],
}

/// Fidelities either given directly or computed from a JSON tables file
/// holding `zz`, `xy` and `xx` count or probability tables.
pub fn process(fidelities: &[f64], tables: Option<&Path>) -> Result<Report> {
    use entfilter::analysis::BasisId::{X, Y, Z};
    let mut r = Report::new("process-report");
    let f: [f64; 3] = match (tables, fidelities) {
        (Some(path), []) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let file: TablesFile = serde_json::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
            let t = [
                TruthTable::new(Z, Z, file.zz)?,
                TruthTable::new(X, Y, file.xy)?,
                TruthTable::new(X, X, file.xx)?,
            ];
            for t in &t {
                push_table(&mut r, &t.label(), t, false);
            }
            [
                table_fidelity(&t[0])?,
                table_fidelity(&t[1])?,
                table_fidelity(&t[2])?,
            ]
        }
        (None, [a, b, c]) => [*a, *b, *c],
        _ => {
            return Err(Error::Config(
                "give exactly three fidelities or --tables <file>".into(),
            ));
        }
    };
    r.real("F_zz", f[0]);
    r.real("F_xy", f[1]);
    r.real("F_xx", f[2]);
    push_process(&mut r, &process_report(f[0], f[1], f[2])?);
    Ok(r)
}

pub fn background(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.visibilities()?;
    let hc = build_filter_circuit(cfg.variant);
    let mut r = Report::new("background");
    r.text("variant", cfg.variant.to_string());
    r.real("v_same", params.v_same);
    r.real("v_cross", params.v_cross);
    let mut models = vec![DetectorModel::Threshold];
    if cfg.detector != DetectorModel::Threshold {
        models.push(cfg.detector);
    }
    for model in models {
        let key = model.to_string().replace(' ', "_");
        let b = background_double_pair_with(&hc, &params, model)?;
        r.real(format!("probability_{key}"), b.probability);
        match b.distribution() {
            Some(d) => r.table(
                format!("distribution_{key}"),
                Z_LABELS,
                ["fraction"],
                d.iter().map(|&x| vec![Cell::Real(x)]).collect(),
            ),
            None => r.note(format!(
                "{model}: no four-fold events, distribution undefined"
            )),
        }
    }
    Ok(r)
}

pub fn simulate(file: &Path, input: &str) -> Result<Report> {
    let text = fs::read_to_string(file)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
    let doc = parse_circuit(&text)?;
    let photons = parse_photons(input)?;
    let result = simulate_heralded(&doc, &photons)?;
    let reg = doc.circuit.registry();

    let mut r = Report::new("simulate");
    r.text("circuit", file.display().to_string());
    r.value("photons", Cell::Int(photons.len() as u64));
    r.real("herald_probability", result.probability);
    let labels: Vec<String> = result
        .branches
        .iter()
        .map(|b| {
            let modes: Vec<String> = b
                .detector_occupation
                .photons()
                .iter()
                .map(|&m| reg.mode(m as usize).to_string())
                .collect();
            if modes.is_empty() {
                "none".to_string()
            } else {
                modes.join(" ")
            }
        })
        .collect();
    r.table(
        "detector_outcomes",
        labels,
        ["probability"],
        result
            .branches
            .iter()
            .map(|b| vec![Cell::Real(b.weight)])
            .collect(),
    );
    if let [o1, o2] = doc.herald.outputs.as_slice() {
        if result.probability > 0.0 {
            if let Ok((rho, _)) = output_density_matrix(&result, (o1, o2)) {
                r.table(
                    "output_polarization",
                    Z_LABELS,
                    ["probability"],
                    (0..4).map(|k| vec![Cell::Real(rho.0[(k, k)].re)]).collect(),
                );
            }
        }
    }
    Ok(r)
}

pub fn export(cfg: &RunConfig) -> String {
    serialize_circuit(&build_filter_circuit(cfg.variant))
}
