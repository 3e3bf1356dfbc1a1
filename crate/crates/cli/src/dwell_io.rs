//! Dwell file format: one JSON header line, then CSV with one row per report.
//!
//! ```text
//! {"frame_interval":0.5,"integration_time":1.0,"mean_aspect_deg":45.0,...}
//! frame_index,t,snr_db,range_m,doppler_mps,accel_mps2,doppler_width_mps,truth_id
//! 0,0.25,33.0,-42.1,0.51,-0.002,,3
//! ```
//!
//! Frames without reports are listed in the header so the frame grid
//! survives a round trip.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use isar3d_core::{Dwell, DwellMeta, Frame, TargetReport};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

const REQUIRED: [&str; 6] = ["frame_index", "t", "snr_db", "range_m", "doppler_mps", "accel_mps2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    frame_interval: f64,
    integration_time: f64,
    mean_aspect_deg: f64,
    mean_tilt_deg: f64,
    /// Exact angles; when present they must agree with the degree fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean_aspect_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean_tilt_rad: Option<f64>,
    range_resolution: f64,
    #[serde(default = "default_wavelength")]
    wavelength: f64,
    n_frames: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    empty_frames: Vec<(usize, f64)>,
}

fn default_wavelength() -> f64 {
    DwellMeta::default().wavelength
}

/// Degrees for display, plus the radians when degrees alone would not
/// convert back exactly.
fn angle_fields(rad: f64) -> (f64, Option<f64>) {
    let d = rad.to_degrees();
    if d.to_radians() == rad {
        (d, None)
    } else {
        (d, Some(rad))
    }
}

fn angle_from(line_deg: f64, rad: Option<f64>, name: &str) -> Result<f64, RunError> {
    match rad {
        None => Ok(line_deg.to_radians()),
        Some(r) if (r.to_degrees() - line_deg).abs() <= 1e-9 * line_deg.abs().max(1.0) => Ok(r),
        Some(r) => Err(data_err(1, format!("{name}_rad {r} disagrees with {name}_deg {line_deg}"))),
    }
}

fn opt(x: Option<impl ToString>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn save_dwell(dwell: &Dwell, path: &Path) -> Result<(), RunError> {
    let m = &dwell.meta;
    let (mean_aspect_deg, mean_aspect_rad) = angle_fields(m.mean_aspect);
    let (mean_tilt_deg, mean_tilt_rad) = angle_fields(m.mean_tilt);
    let header = Header {
        frame_interval: m.frame_interval,
        integration_time: m.integration_time,
        mean_aspect_deg,
        mean_tilt_deg,
        mean_aspect_rad,
        mean_tilt_rad,
        range_resolution: m.range_resolution,
        wavelength: m.wavelength,
        n_frames: dwell.frames.len(),
        empty_frames: dwell
            .frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.reports.is_empty())
            .map(|(i, f)| (i, f.t))
            .collect(),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", serde_json::to_string(&header).map_err(std::io::Error::other)?)?;
    writeln!(out, "{},doppler_width_mps,truth_id", REQUIRED.join(","))?;
    for (i, fr) in dwell.frames.iter().enumerate() {
        for r in &fr.reports {
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{}",
                fr.t,
                r.snr,
                r.r,
                r.f,
                r.a,
                opt(r.doppler_width),
                opt(r.truth_id)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn data_err(line: usize, msg: impl std::fmt::Display) -> RunError {
    RunError::Data(format!("line {line}: {msg}"))
}

pub fn load_dwell(path: &Path) -> Result<Dwell, RunError> {
    let file = std::fs::File::open(path).map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| data_err(1, e))?;
    let header: Header = serde_json::from_str(first.trim()).map_err(|e| data_err(1, format!("header: {e}")))?;
    let meta = DwellMeta {
        frame_interval: header.frame_interval,
        integration_time: header.integration_time,
        mean_aspect: angle_from(header.mean_aspect_deg, header.mean_aspect_rad, "mean_aspect")?,
        mean_tilt: angle_from(header.mean_tilt_deg, header.mean_tilt_rad, "mean_tilt")?,
        range_resolution: header.range_resolution,
        wavelength: header.wavelength,
    };

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names = csv.headers().map_err(|e| data_err(2, e))?.clone();
    let col = |name: &str| names.iter().position(|h| h.trim() == name);
    let mut idx = [0usize; 6];
    for (k, name) in REQUIRED.iter().enumerate() {
        idx[k] = col(name).ok_or_else(|| data_err(2, format!("missing column {name}")))?;
    }
    let width_col = col("doppler_width_mps");
    let truth_col = col("truth_id");

    let mut frames: Vec<Option<Frame>> = vec![None; header.n_frames];
    for &(i, t) in &header.empty_frames {
        let slot = frames.get_mut(i).ok_or_else(|| data_err(1, format!("empty frame {i} out of range")))?;
        *slot = Some(Frame { t, integration_time: meta.integration_time, reports: Vec::new() });
    }
    let mut last_index = 0usize;
    for (row, rec) in csv.records().enumerate() {
        let line = row + 3;
        let rec = rec.map_err(|e| data_err(line, e))?;
        let field = |k: usize| rec.get(k).map(str::trim).unwrap_or("");
        let num = |k: usize, name: &str| -> Result<f64, RunError> {
            field(k).parse::<f64>().map_err(|_| data_err(line, format!("bad {name} value {:?}", field(k))))
        };
        let fi: usize = field(idx[0])
            .parse()
            .map_err(|_| data_err(line, format!("bad frame_index value {:?}", field(idx[0]))))?;
        if fi >= header.n_frames {
            return Err(data_err(line, format!("frame_index {fi} beyond n_frames {}", header.n_frames)));
        }
        if fi < last_index {
            return Err(data_err(line, "frame_index decreases"));
        }
        last_index = fi;
        let t = num(idx[1], "t")?;
        let optional = |c: Option<usize>| c.map(field).filter(|s| !s.is_empty());
        let doppler_width = optional(width_col)
            .map(|s| s.parse::<f64>().map_err(|_| data_err(line, format!("bad doppler_width_mps value {s:?}"))))
            .transpose()?;
        let truth_id = optional(truth_col)
            .map(|s| s.parse::<usize>().map_err(|_| data_err(line, format!("bad truth_id value {s:?}"))))
            .transpose()?;
        let report = TargetReport {
            frame_index: fi,
            t,
            snr: num(idx[2], "snr_db")?,
            r: num(idx[3], "range_m")?,
            f: num(idx[4], "doppler_mps")?,
            a: num(idx[5], "accel_mps2")?,
            doppler_width,
            truth_id,
        };
        let frame = frames[fi].get_or_insert_with(|| Frame { t, integration_time: meta.integration_time, reports: Vec::new() });
        if frame.t != t {
            return Err(data_err(line, format!("time {t} disagrees with frame {fi} time {}", frame.t)));
        }
        frame.reports.push(report);
    }
    let frames: Vec<Frame> = frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.ok_or_else(|| RunError::Data(format!("frame {i} has no rows and is not listed as empty"))))
        .collect::<Result<_, _>>()?;
    for w in frames.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(RunError::Data(format!("frame times not increasing at t = {}", w[1].t)));
        }
    }
    let dwell = Dwell { meta, frames };
    dwell.validate().map_err(|e| RunError::Data(e.to_string()))?;
    Ok(dwell)
}
