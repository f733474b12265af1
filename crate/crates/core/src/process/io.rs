//! Trajectory persistence: RFC 4180 CSV and a little-endian binary frame.
//!
//! Both formats round-trip losslessly: CSV uses shortest-round-trip float
//! formatting, the frame stores raw IEEE-754 bits.

use super::Trajectory;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed trajectory data: {0}")]
    Format(String),
}

const MAGIC: &[u8; 6] = b"RCAR1\0";
const FRAME_VERSION: u8 = 1;

/// Writes `index,x[,rho,eps]` rows; row 0 carries `x0` with empty driving
/// fields.
pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<(), TrajectoryIoError> {
    let mut out = csv::Writer::from_writer(w);
    let with_driving = traj.driving.is_some();
    if with_driving {
        out.write_record(["index", "x", "rho", "eps"])?;
        out.write_record([0.to_string(), traj.x0.to_string(), String::new(), String::new()])?;
        let driving = traj.driving.as_ref().expect("checked");
        for (i, (&x, &(rho, eps))) in traj.states.iter().zip(driving).enumerate() {
            out.write_record([
                (i + 1).to_string(),
                x.to_string(),
                rho.to_string(),
                eps.to_string(),
            ])?;
        }
    } else {
        out.write_record(["index", "x"])?;
        out.write_record([0.to_string(), traj.x0.to_string()])?;
        for (i, &x) in traj.states.iter().enumerate() {
            out.write_record([(i + 1).to_string(), x.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Trajectory, TrajectoryIoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(r);
    let headers = rdr.headers()?.clone();
    let with_driving = match headers.len() {
        2 => false,
        4 => true,
        n => return Err(TrajectoryIoError::Format(format!("expected 2 or 4 columns, got {n}"))),
    };
    let parse = |s: &str, what: &str| {
        s.parse::<f64>()
            .map_err(|_| TrajectoryIoError::Format(format!("bad {what} field {s:?}")))
    };
    let mut x0 = None;
    let mut states = Vec::new();
    let mut driving = with_driving.then(Vec::new);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let x = parse(&rec[1], "x")?;
        if row == 0 {
            x0 = Some(x);
            continue;
        }
        states.push(x);
        if let Some(d) = driving.as_mut() {
            d.push((parse(&rec[2], "rho")?, parse(&rec[3], "eps")?));
        }
    }
    let x0 = x0.ok_or_else(|| TrajectoryIoError::Format("missing x0 row".into()))?;
    Ok(Trajectory { x0, states, driving, stream_id: 0 })
}

/// Binary frame: magic, version, flags, stream id, x0, n, states, driving.
/// All multi-byte values little-endian.
pub fn write_frame<W: Write>(mut w: W, traj: &Trajectory) -> Result<(), TrajectoryIoError> {
    w.write_all(MAGIC)?;
    w.write_all(&[FRAME_VERSION])?;
    let flags: u8 = traj.driving.is_some() as u8;
    w.write_all(&[flags])?;
    w.write_all(&traj.stream_id.to_le_bytes())?;
    w.write_all(&traj.x0.to_le_bytes())?;
    w.write_all(&(traj.states.len() as u64).to_le_bytes())?;
    for x in &traj.states {
        w.write_all(&x.to_le_bytes())?;
    }
    if let Some(driving) = &traj.driving {
        for (rho, eps) in driving {
            w.write_all(&rho.to_le_bytes())?;
            w.write_all(&eps.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a frame written by [`write_frame`].
pub fn read_frame<R: Read>(mut r: R) -> Result<Trajectory, TrajectoryIoError> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TrajectoryIoError::Format("bad magic".into()));
    }
    let mut header = [0u8; 2];
    r.read_exact(&mut header)?;
    if header[0] != FRAME_VERSION {
        return Err(TrajectoryIoError::Format(format!("unsupported frame version {}", header[0])));
    }
    let with_driving = match header[1] {
        0 => false,
        1 => true,
        f => return Err(TrajectoryIoError::Format(format!("unknown flags {f:#x}"))),
    };
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let stream_id = u64::from_le_bytes(u64buf);
    r.read_exact(&mut u64buf)?;
    let x0 = f64::from_le_bytes(u64buf);
    r.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    let read_f64 = |r: &mut R| -> Result<f64, TrajectoryIoError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        states.push(read_f64(&mut r)?);
    }
    let driving = if with_driving {
        let mut d = Vec::with_capacity(n);
        for _ in 0..n {
            let rho = read_f64(&mut r)?;
            let eps = read_f64(&mut r)?;
            d.push((rho, eps));
        }
        Some(d)
    } else {
        None
    };
    Ok(Trajectory { x0, states, driving, stream_id })
}

pub fn save_frame<P: AsRef<Path>>(path: P, traj: &Trajectory) -> Result<(), TrajectoryIoError> {
    let file = std::fs::File::create(path)?;
    write_frame(std::io::BufWriter::new(file), traj)
}

pub fn load_frame<P: AsRef<Path>>(path: P) -> Result<Trajectory, TrajectoryIoError> {
    let file = std::fs::File::open(path)?;
    read_frame(std::io::BufReader::new(file))
}
