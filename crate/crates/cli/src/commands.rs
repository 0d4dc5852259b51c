use canal4d_core::closedform::{self, InvariantSample, OracleComparison};
use canal4d_core::{CanalSurface, Error, Point4};

use crate::config::{ConfigError, Job};
use crate::output::{chunked, csv_rows, num, opt};

pub const GENERATE_HEADER: [&str; 7] = ["u", "v", "w", "x1", "x2", "x3", "x4"];

pub const CURVATURE_HEADER: [&str; 18] = [
    "u",
    "v",
    "w",
    "x1",
    "x2",
    "x3",
    "x4",
    "K_closed",
    "H_closed",
    "c1",
    "c2",
    "c3",
    "K_num",
    "H_num",
    "identity_residual",
    "membership_residual",
    "orientation",
    "error",
];

fn header(cols: &[&str]) -> String {
    csv_rows([cols.iter().map(|c| c.to_string())])
}

/// Point grid as CSV. Any node that fails to evaluate aborts the command.
pub fn generate(job: &Job) -> Result<String, ConfigError> {
    let nodes = job.config.grid.nodes();
    let surface = &job.surface;
    let chunks = chunked(&nodes, job.config.workers, |chunk| -> Result<String, ConfigError> {
        let mut rows = Vec::with_capacity(chunk.len());
        for &[u, v, w] in chunk {
            let x = surface
                .evaluate(u, v, w)
                .map_err(|e| ConfigError::new("grid", format!("node ({u}, {v}, {w}): {e}")))?;
            rows.push([u, v, w].into_iter().chain(x.0).map(num).collect::<Vec<_>>());
        }
        Ok(csv_rows(rows))
    });
    let mut out = header(&GENERATE_HEADER);
    for c in chunks {
        out.push_str(&c?);
    }
    Ok(out)
}

/// One row of the curvature table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CurvatureRecord {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: Option<Point4>,
    pub closed: Option<InvariantSample>,
    pub numeric: Option<(f64, f64)>,
    pub identity_residual: Option<f64>,
    pub membership_residual: Option<f64>,
    pub orientation: Option<f64>,
    pub error: Option<String>,
}

impl CurvatureRecord {
    pub fn at(surface: &CanalSurface, u: f64, v: f64, w: f64, oracle: Option<canal4d_core::diffgeo::DerivativeMode>) -> Self {
        let mut rec = CurvatureRecord { u, v, w, ..Default::default() };
        let mut errors = Vec::new();
        let keep = |r: Result<f64, Error>, errors: &mut Vec<String>| match r {
            Ok(x) => Some(x),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        match surface.evaluate(u, v, w) {
            Ok(x) => rec.x = Some(x),
            Err(e) => errors.push(e.to_string()),
        }
        match closedform::invariants(surface, u, v, w) {
            Ok(s) => {
                rec.closed = Some(s);
                rec.identity_residual = keep(closedform::identity_residual(surface, u, v, w), &mut errors);
            }
            Err(e) => errors.push(e.to_string()),
        }
        if rec.x.is_some() {
            rec.membership_residual = keep(surface.membership_residual(u, v, w), &mut errors);
        }
        if let (Some(mode), Some(_)) = (oracle, rec.closed) {
            match closedform::compare_with_oracle(surface, u, v, w, mode) {
                Ok(OracleComparison { numeric_gaussian, numeric_mean, orientation, .. }) => {
                    rec.numeric = Some((numeric_gaussian, numeric_mean));
                    rec.orientation = Some(orientation);
                }
                Err(e) => errors.push(format!("oracle: {e}")),
            }
        }
        errors.dedup();
        if !errors.is_empty() {
            rec.error = Some(errors.join("; "));
        }
        rec
    }

    pub fn fields(&self) -> Vec<String> {
        let mut f = vec![num(self.u), num(self.v), num(self.w)];
        match self.x {
            Some(x) => f.extend(x.0.map(num)),
            None => f.extend(std::iter::repeat_n(String::new(), 4)),
        }
        let c = self.closed;
        f.push(opt(c.map(|s| s.gaussian)));
        f.push(opt(c.map(|s| s.mean)));
        for i in 0..3 {
            f.push(opt(c.map(|s| s.principal[i])));
        }
        f.push(opt(self.numeric.map(|n| n.0)));
        f.push(opt(self.numeric.map(|n| n.1)));
        f.push(opt(self.identity_residual));
        f.push(opt(self.membership_residual));
        f.push(opt(self.orientation));
        f.push(self.error.clone().unwrap_or_default());
        f
    }
}

/// Curvature table as CSV. Per-node failures go to the `error` column.
pub fn curvature(job: &Job, oracle: bool) -> String {
    let nodes = job.config.grid.nodes();
    let mode = oracle.then(|| job.config.derivative.mode());
    let surface = &job.surface;
    let chunks = chunked(&nodes, job.config.workers, |chunk| {
        csv_rows(chunk.iter().map(|&[u, v, w]| CurvatureRecord::at(surface, u, v, w, mode).fields()))
    });
    let mut out = header(&CURVATURE_HEADER);
    out.extend(chunks);
    out
}

/// A fixed value for one grid axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slice {
    /// `0`, `1` or `2` for `u`, `v`, `w`.
    pub axis: usize,
    pub value: f64,
}

impl std::str::FromStr for Slice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, value) = s.split_once('=').ok_or_else(|| format!("expected axis=value, got `{s}`"))?;
        let axis = match name.trim() {
            "u" => 0,
            "v" => 1,
            "w" => 2,
            other => return Err(format!("unknown axis `{other}`; expected u, v or w")),
        };
        let value = value.trim().parse::<f64>().map_err(|e| format!("slice value `{value}`: {e}"))?;
        if !value.is_finite() {
            return Err(format!("slice value `{value}` is not finite"));
        }
        Ok(Slice { axis, value })
    }
}

const AXIS_NAMES: [&str; 3] = ["u", "v", "w"];

/// `E⁴₁ → E³` map used by the mesh export.
fn projection(job: &Job) -> [[f64; 4]; 3] {
    if let Some(p) = job.config.output.projection {
        return p;
    }
    let drop = job.config.output.drop.unwrap_or(1) - 1;
    let mut p = [[0.0; 4]; 3];
    for (row, col) in (0..4).filter(|&c| c != drop).enumerate() {
        p[row][col] = 1.0;
    }
    p
}

/// Triangle mesh of the 2-parameter slice. Vertices run row-major over the
/// two free axes; each grid quad becomes two triangles.
pub fn export_obj(job: &Job, slice: Slice) -> Result<String, ConfigError> {
    let axes = job.config.grid.axes();
    let fixed = axes[slice.axis];
    let field = format!("grid.{}", AXIS_NAMES[slice.axis]);
    if fixed.count < 2 {
        return Err(ConfigError::new(field, "cannot slice an axis with a single node"));
    }
    if !(fixed.min..=fixed.max).contains(&slice.value) {
        return Err(ConfigError::new(
            "slice",
            format!("{} = {} is outside [{}, {}]", AXIS_NAMES[slice.axis], slice.value, fixed.min, fixed.max),
        ));
    }
    let free: Vec<usize> = (0..3).filter(|&a| a != slice.axis).collect();
    let (a, b) = (axes[free[0]].values(), axes[free[1]].values());
    let mut nodes = Vec::with_capacity(a.len() * b.len());
    for &x in &a {
        for &y in &b {
            let mut p = [0.0; 3];
            p[slice.axis] = slice.value;
            p[free[0]] = x;
            p[free[1]] = y;
            nodes.push(p);
        }
    }
    let proj = projection(job);
    let surface = &job.surface;
    let chunks = chunked(&nodes, job.config.workers, |chunk| -> Result<String, ConfigError> {
        let mut s = String::new();
        for &[u, v, w] in chunk {
            let x = surface
                .evaluate(u, v, w)
                .map_err(|e| ConfigError::new("slice", format!("node ({u}, {v}, {w}): {e}")))?;
            let y = proj.map(|row| (0..4).map(|i| row[i] * x.0[i]).sum::<f64>());
            s.push_str(&format!("v {} {} {}\n", num(y[0]), num(y[1]), num(y[2])));
        }
        Ok(s)
    });
    let mut out = String::new();
    for c in chunks {
        out.push_str(&c?);
    }
    let nb = b.len();
    for i in 0..a.len().saturating_sub(1) {
        for j in 0..nb.saturating_sub(1) {
            let p = i * nb + j + 1;
            let q = p + nb;
            out.push_str(&format!("f {} {} {}\nf {} {} {}\n", p, q, q + 1, p, q + 1, p + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn tube(m: u8, counts: [usize; 3]) -> Job {
        let (v, w) = if m >= 7 { ((0.0, 6.0), (-1.0, 1.0)) } else { ((-1.0, 1.0), (-1.0, 1.0)) };
        parse(&format!(
            r#"{{"type": {m}, "spine": {{"curvatures": {{"constant": [0, 0, 0]}}}}, "radius": {{"polynomial": [1]}},
               "grid": {{"u": {{"min": 0, "max": 1, "count": {}}}, "v": {{"min": {}, "max": {}, "count": {}}},
                        "w": {{"min": {}, "max": {}, "count": {}}}}}}}"#,
            counts[0], v.0, v.1, counts[1], w.0, w.1, counts[2]
        ))
        .unwrap()
        .build()
        .unwrap()
    }

    #[test]
    fn generate_rows_follow_the_grid() {
        let csv = generate(&tube(2, [3, 3, 3])).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,v,w,x1,x2,x3,x4");
        assert_eq!(lines.len(), 28);
        assert!(lines[1].starts_with("0,-1,-1,"));
        assert!(lines[27].starts_with("1,1,1,"));
    }

    #[test]
    fn tube_curvature_rows() {
        let csv = curvature(&tube(2, [2, 2, 2]), true);
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), CURVATURE_HEADER.len());
            assert_eq!(f[7].parse::<f64>().unwrap(), 0.0);
            assert!((f[8].parse::<f64>().unwrap() + 2.0 / 3.0).abs() < 1e-15);
            assert!(f[12].parse::<f64>().unwrap().abs() < 1e-6);
            assert_eq!(f[17], "");
        }
    }

    #[test]
    fn no_oracle_leaves_numeric_columns_empty() {
        let csv = curvature(&tube(7, [2, 2, 2]), false);
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!((f[12], f[13], f[16]), ("", "", ""));
            assert!((f[8].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_slice_is_two_triangles() {
        let obj = export_obj(&tube(2, [2, 2, 2]), Slice { axis: 2, value: 0.0 }).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces, ["f 1 3 4", "f 1 4 2"]);
    }

    #[test]
    fn slice_errors() {
        let job = tube(2, [1, 3, 3]);
        assert_eq!(export_obj(&job, Slice { axis: 0, value: 0.0 }).unwrap_err().field, "grid.u");
        assert_eq!(export_obj(&job, Slice { axis: 1, value: 5.0 }).unwrap_err().field, "slice");
        assert!("x=1".parse::<Slice>().is_err());
        assert_eq!("w=0.5".parse::<Slice>().unwrap(), Slice { axis: 2, value: 0.5 });
    }

    #[test]
    fn dropping_x1_keeps_the_rest() {
        let job = tube(7, [2, 2, 2]);
        let obj = export_obj(&job, Slice { axis: 0, value: 0.0 }).unwrap();
        let first = obj.lines().next().unwrap();
        let x = job.surface.evaluate(0.0, 0.0, -1.0).unwrap();
        assert_eq!(first, format!("v {} {} {}", num(x.0[1]), num(x.0[2]), num(x.0[3])));
    }
}
