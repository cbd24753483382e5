//! CSV persistence: comma-delimited, fixed header, floats with 17 significant digits.

use std::io::Write;

use crate::runner::Table;

pub const CONVERGENCE_HEADER: [&str; 11] = [
    "case",
    "method",
    "scheme",
    "n_steps",
    "n_fft_pairs",
    "n_exponentials",
    "l2_error",
    "l2_error_plain",
    "energy_error",
    "norm_defect",
    "wall_time_seconds",
];
pub const SINGLE_STEP_HEADER: [&str; 6] = ["case", "method", "t", "l2_error", "l2_error_plain", "norm_defect"];
pub const BASIS_SIZE_HEADER: [&str; 5] = ["case", "delta", "basis_size", "residual", "l2_error"];
pub const ORDER_FIT_HEADER: [&str; 4] = ["method", "n_steps", "h", "l2_error"];

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_table<W: Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match table {
        Table::Convergence(rows) => {
            w.write_record(CONVERGENCE_HEADER)?;
            for r in rows {
                w.write_record([
                    r.case.clone(),
                    r.method.clone(),
                    r.scheme.clone(),
                    r.n_steps.to_string(),
                    r.n_fft_pairs.to_string(),
                    r.n_exponentials.to_string(),
                    float(r.l2_error),
                    float(r.l2_error_plain),
                    float(r.energy_error),
                    float(r.norm_defect),
                    float(r.wall_time_seconds),
                ])?;
            }
        }
        Table::SingleStep(rows) => {
            w.write_record(SINGLE_STEP_HEADER)?;
            for r in rows {
                w.write_record([
                    r.case.clone(),
                    r.method.clone(),
                    float(r.t),
                    float(r.l2_error),
                    float(r.l2_error_plain),
                    float(r.norm_defect),
                ])?;
            }
        }
        Table::BasisSize(rows) => {
            w.write_record(BASIS_SIZE_HEADER)?;
            for r in rows {
                w.write_record([
                    r.case.clone(),
                    float(r.delta),
                    r.basis_size.to_string(),
                    float(r.residual),
                    float(r.l2_error),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of an order check: `(method, n_steps, h, error)`.
pub fn write_order_fit<W: Write>(rows: &[(String, usize, f64, f64)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ORDER_FIT_HEADER)?;
    for (method, n, h, e) in rows {
        w.write_record([method.clone(), n.to_string(), float(*h), float(*e)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::BasisSizeRow;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(float(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn basis_table() {
        let t = Table::BasisSize(vec![BasisSizeRow {
            case: "c".into(),
            delta: 2.0,
            basis_size: 29,
            residual: 1e-12,
            l2_error: 5e-12,
        }]);
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "case,delta,basis_size,residual,l2_error\nc,2.0000000000000000e0,29,9.9999999999999998e-13,4.9999999999999997e-12\n"
        );
    }
}
