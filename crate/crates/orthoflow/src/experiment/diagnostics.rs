//! One diagnostics row per time sample, and its CSV encoding.
//!
//! CSV contract: UTF-8, fixed header, '.' decimal, 17-significant-digit
//! floats (exact f64 round trip), absent values as empty cells.

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,energy,enstrophy,helicity,max_speed,max_vorticity,div_linf,\
u_dot_gradp_linf_support,u_dot_gradp_linf_boundary,cosine_max,omega_set_fraction,\
sup_u2_omega,sup_u2_boundary,sup_u2_complement,max_principle_holds,subharm_min,\
lamb_residual,ns_energy_identity_residual,theta_transport_residual,\
theta_reconstruction_residual,bkm_omega_integral,bkm_grad_integral";

/// One time-sample row of every measured invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub helicity: f64,
    pub max_speed: f64,
    pub max_vorticity: f64,
    pub div_linf: f64,
    pub u_dot_gradp_linf_support: Option<f64>,
    pub u_dot_gradp_linf_boundary: Option<f64>,
    pub cosine_max: f64,
    pub omega_set_fraction: f64,
    pub sup_u2_omega: Option<f64>,
    pub sup_u2_boundary: Option<f64>,
    pub sup_u2_complement: Option<f64>,
    pub max_principle_holds: Option<bool>,
    pub subharm_min: Option<f64>,
    pub lamb_residual: f64,
    pub ns_energy_identity_residual: f64,
    pub theta_transport_residual: Option<f64>,
    pub theta_reconstruction_residual: Option<f64>,
    pub bkm_omega_integral: Option<f64>,
    pub bkm_grad_integral: Option<f64>,
}

/// 17 significant digits: enough for exact f64 round trips.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl DiagnosticsRecord {
    pub fn to_csv_row(&self) -> String {
        let holds = match self.max_principle_holds {
            Some(true) => "true".to_string(),
            Some(false) => "false".to_string(),
            None => String::new(),
        };
        [
            format_float(self.t),
            format_float(self.energy),
            format_float(self.enstrophy),
            format_float(self.helicity),
            format_float(self.max_speed),
            format_float(self.max_vorticity),
            format_float(self.div_linf),
            opt(self.u_dot_gradp_linf_support),
            opt(self.u_dot_gradp_linf_boundary),
            format_float(self.cosine_max),
            format_float(self.omega_set_fraction),
            opt(self.sup_u2_omega),
            opt(self.sup_u2_boundary),
            opt(self.sup_u2_complement),
            holds,
            opt(self.subharm_min),
            format_float(self.lamb_residual),
            format_float(self.ns_energy_identity_residual),
            opt(self.theta_transport_residual),
            opt(self.theta_reconstruction_residual),
            opt(self.bkm_omega_integral),
            opt(self.bkm_grad_integral),
        ]
        .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let cells: Vec<&str> = row.split(',').collect();
        let ncols = CSV_HEADER.split(',').count();
        if cells.len() != ncols {
            return Err(Error::Config(format!(
                "record row has {} cells, expected {ncols}",
                cells.len()
            )));
        }
        let req = |i: usize| -> Result<f64> {
            cells[i]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("cell {i} ({:?}): {e}", cells[i])))
        };
        let optional = |i: usize| -> Result<Option<f64>> {
            if cells[i].is_empty() {
                Ok(None)
            } else {
                req(i).map(Some)
            }
        };
        let holds = match cells[14] {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            other => {
                return Err(Error::Config(format!(
                    "max_principle_holds cell {other:?} is not a boolean"
                )))
            }
        };
        Ok(Self {
            t: req(0)?,
            energy: req(1)?,
            enstrophy: req(2)?,
            helicity: req(3)?,
            max_speed: req(4)?,
            max_vorticity: req(5)?,
            div_linf: req(6)?,
            u_dot_gradp_linf_support: optional(7)?,
            u_dot_gradp_linf_boundary: optional(8)?,
            cosine_max: req(9)?,
            omega_set_fraction: req(10)?,
            sup_u2_omega: optional(11)?,
            sup_u2_boundary: optional(12)?,
            sup_u2_complement: optional(13)?,
            max_principle_holds: holds,
            subharm_min: optional(15)?,
            lamb_residual: req(16)?,
            ns_energy_identity_residual: req(17)?,
            theta_transport_residual: optional(18)?,
            theta_reconstruction_residual: optional(19)?,
            bkm_omega_integral: optional(20)?,
            bkm_grad_integral: optional(21)?,
        })
    }
}

/// Parse a whole records file (header plus rows).
pub fn read_records_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => {
            return Err(Error::Config(format!(
                "records header mismatch: {h:?}"
            )))
        }
        None => return Err(Error::Config("empty records file".into())),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(DiagnosticsRecord::from_csv_row)
        .collect()
}
