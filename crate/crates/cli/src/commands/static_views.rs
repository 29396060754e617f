use super::Context;
use crate::cli::UnitsArgs;
use crate::error::CliError;
use crate::output::{num, Output};
use driven_hydrogen::secular::{FieldConfig, FIELD_AU_V_PER_CM};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Serialize)]
struct UnitsJob {
    n0: u32,
    f0: f64,
    fs0: f64,
}

pub fn convert_units(ctx: &Context, args: UnitsArgs) -> Result<Vec<PathBuf>, CliError> {
    let n0 = args.n0.unwrap_or(60);
    let field = args.field_v_per_cm.map(|v| v / FIELD_AU_V_PER_CM);
    let static_field = args.static_v_per_cm.map(|v| v / FIELD_AU_V_PER_CM);
    let scale = (n0 as f64).powi(4);
    let config = FieldConfig::new(
        n0,
        field.map(|f| f * scale).unwrap_or(args.f0.unwrap_or(0.015)),
        static_field.map(|f| f * scale).unwrap_or(args.fs0.unwrap_or(0.003)),
    )?;
    let job = UnitsJob { n0, f0: config.f0, fs0: config.fs0 };
    let a = config.scaled_to_atomic();
    let lab = config.lab_units();
    let rows = vec![
        ("n0", n0.to_string()),
        ("f0_scaled", num(config.f0)),
        ("fs0_scaled", num(config.fs0)),
        ("field_au", num(a.field)),
        ("static_field_au", num(a.static_field)),
        ("omega_au", num(a.omega)),
        ("period_au", num(config.period())),
        ("field_v_per_cm", num(lab.field_v_per_cm)),
        ("static_field_v_per_cm", num(lab.static_field_v_per_cm)),
        ("frequency_ghz", num(lab.frequency_ghz)),
    ];
    for (k, v) in &rows {
        println!("{k:<24}{v}");
    }
    let mut out = Output::new(&ctx.out, "convert-units", &job)?;
    out.csv("units.csv", "units/1", &["quantity", "value"], rows.into_iter().map(|(k, v)| vec![k.to_string(), v]))?;
    out.finish()
}
