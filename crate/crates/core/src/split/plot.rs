use super::SplitReport;
use crate::{Error, Result};

/// Curves for figures as `series,x,y` rows.
///
/// * `length_vs_window`: maximizer value against window length `2n`.
/// * `length_slope`: the growth slope, at the largest window.
/// * `tau_error_vs_density`: median relative maximizer error per density.
pub fn plotdata(report: &SplitReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::input(format!("csv: {e}"));
    w.write_record(["series", "x", "y"]).map_err(csv_err)?;
    if let Some(line) = &report.line {
        for v in &line.values {
            w.serialize(("length_vs_window", 2.0 * v.n, v.value)).map_err(csv_err)?;
        }
        if let Some(last) = line.values.last() {
            w.serialize(("length_slope", 2.0 * last.n, line.slope)).map_err(csv_err)?;
        }
    }
    for row in &report.sweep {
        w.serialize(("tau_error_vs_density", row.density, row.median_rel_error)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::input(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::input(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::{run_split, RunConfig};

    #[test]
    fn curves_from_a_grid_run() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"sprinkle": {"sigma": {"type": "circle", "L": 1.0}, "window": [-2, 2], "mode": {"grid": {"nx": 8, "nt": 33}}},
                "family": [1, 2],
                "sweep": {"densities": [100, 200], "pairs": 5, "window": [0, 2.5]}}"#,
        )
        .unwrap();
        let csv = plotdata(&run_split(&cfg).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "series,x,y");
        assert_eq!(lines[1], "length_vs_window,2.0,2.0");
        assert_eq!(lines[2], "length_vs_window,4.0,4.0");
        assert_eq!(lines[3], "length_slope,4.0,1.0");
        assert!(lines[4].starts_with("tau_error_vs_density,100.0,"));
        assert_eq!(lines.len(), 6);
    }
}
