//! Batch front end for the K-ring library: load a problem description from
//! json, run one named analysis, emit a deterministic report.
//!
//! Reports are stable byte-for-byte for a fixed input: every collection is
//! ordered, json objects serialize with sorted keys, and worker threads only
//! split index ranges whose results are merged back in order.

use kring::fan::{self, Cone, Fan};
use kring::gkm;
use kring::lattice::Coord;
use kring::laurent::LaurentPoly;
use kring::toroidal::{self, ToroidalError};
use kring::weyl::{self, RootDatum, SteinbergBasis, WeylError, WeylGroup};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("/: malformed json: {0}")]
    Json(String),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Invalid {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Debug, Default, Clone)]
pub struct Psg {
    pub nu0: Option<Vec<Coord>>,
    pub nu1: Option<Vec<Coord>>,
    pub nu2: Option<Vec<Coord>>,
}

#[derive(Debug)]
pub struct Problem {
    pub datum: RootDatum,
    pub fan_plus: Fan,
    pub psg: Psg,
}

fn int_vec(v: &Value, loc: &str) -> Result<Vec<Coord>, LoadError> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(loc, "expected an array of integers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_i64()
                .ok_or_else(|| invalid(format!("{loc}/{i}"), "expected an integer"))
        })
        .collect()
}

fn parse_root_datum(v: &Value) -> Result<RootDatum, LoadError> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("/root_datum", "expected an object"))?;
    let central = match obj.get("central_rank") {
        None => 0,
        Some(c) => c
            .as_u64()
            .ok_or_else(|| invalid("/root_datum/central_rank", "expected a non-negative integer"))?
            as usize,
    };
    if let Some(t) = obj.get("type") {
        let name = t
            .as_str()
            .ok_or_else(|| invalid("/root_datum/type", "expected a string"))?;
        return RootDatum::named(name, central)
            .map_err(|e| invalid("/root_datum/type", e.to_string()));
    }
    if let Some(c) = obj.get("cartan") {
        let rows = c
            .as_array()
            .ok_or_else(|| invalid("/root_datum/cartan", "expected an array of rows"))?;
        let mut mat = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            mat.push(int_vec(row, &format!("/root_datum/cartan/{i}"))?);
        }
        let m = kring::lattice::IntMat::from_rows(&mat);
        return RootDatum::new(m, central).map_err(|e| invalid("/root_datum/cartan", e.to_string()));
    }
    Err(invalid("/root_datum", "expected a type tag or a cartan matrix"))
}

fn parse_fan(v: &Value, datum: &RootDatum) -> Result<Fan, LoadError> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("/fan_plus", "expected an object"))?;
    let n = obj
        .get("ambient_rank")
        .and_then(Value::as_u64)
        .ok_or_else(|| invalid("/fan_plus/ambient_rank", "expected a non-negative integer"))?
        as usize;
    if n != datum.rank() {
        return Err(invalid(
            "/fan_plus/ambient_rank",
            format!("must equal the root datum rank {}", datum.rank()),
        ));
    }
    let cones_v = obj
        .get("cones")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("/fan_plus/cones", "expected an array of cones"))?;
    let mut cones = Vec::new();
    for (i, cv) in cones_v.iter().enumerate() {
        let rays_v = cv
            .as_array()
            .ok_or_else(|| invalid(format!("/fan_plus/cones/{i}"), "expected an array of rays"))?;
        let mut rays = Vec::new();
        for (j, rv) in rays_v.iter().enumerate() {
            let ray = int_vec(rv, &format!("/fan_plus/cones/{i}/{j}"))?;
            if !datum.is_dominant_coweight(&ray) {
                return Err(invalid(
                    format!("/fan_plus/cones/{i}/{j}"),
                    format!("ray {ray:?} outside the dominant chamber"),
                ));
            }
            rays.push(ray);
        }
        cones.push(
            Cone::new(n, rays).map_err(|e| invalid(format!("/fan_plus/cones/{i}"), e.to_string()))?,
        );
    }
    Fan::new(n, cones).map_err(|e| invalid("/fan_plus", e.to_string()))
}

fn parse_psg(v: Option<&Value>, n: usize) -> Result<Psg, LoadError> {
    let mut psg = Psg::default();
    let Some(v) = v else { return Ok(psg) };
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("/psg", "expected an object"))?;
    for key in ["nu0", "nu1", "nu2"] {
        if let Some(x) = obj.get(key) {
            let loc = format!("/psg/{key}");
            let vec = int_vec(x, &loc)?;
            if vec.len() != n {
                return Err(invalid(loc, format!("expected length {n}")));
            }
            match key {
                "nu0" => psg.nu0 = Some(vec),
                "nu1" => psg.nu1 = Some(vec),
                _ => psg.nu2 = Some(vec),
            }
        }
    }
    Ok(psg)
}

/// Parse and validate a problem description: root datum, chamber fan with
/// every ray inside the dominant chamber, optional one-parameter subgroup
/// data. Validation errors carry a json pointer to the offending value.
pub fn load_problem_text(text: &str) -> Result<Problem, LoadError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LoadError::Json(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("/", "expected an object"))?;
    let datum = parse_root_datum(
        obj.get("root_datum")
            .ok_or_else(|| invalid("/root_datum", "missing"))?,
    )?;
    let fan_plus = parse_fan(
        obj.get("fan_plus")
            .ok_or_else(|| invalid("/fan_plus", "missing"))?,
        &datum,
    )?;
    let psg = parse_psg(obj.get("psg"), datum.rank())?;
    Ok(Problem {
        datum,
        fan_plus,
        psg,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    PaperConsistencyFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Fail => "fail",
            Status::PaperConsistencyFailure => "paper-consistency-failure",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
            Status::PaperConsistencyFailure => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub payload: Value,
}

impl Report {
    pub fn render_json(&self) -> String {
        let v = json!({
            "command": self.command,
            "status": self.status.as_str(),
            "payload": self.payload,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\nstatus: {}\n", self.command, self.status.as_str());
        if let Some(map) = self.payload.as_object() {
            for (k, v) in map {
                out.push_str(&format!("{k}: {v}\n"));
            }
        } else {
            out.push_str(&format!("payload: {}\n", self.payload));
        }
        out
    }
}

pub const COMMANDS: [&str; 12] = [
    "check-cellular",
    "gkm-graph",
    "membership",
    "symmetrize",
    "decompose",
    "multiply",
    "multstr-check",
    "relwond-check",
    "ordinary-rank",
    "steinberg",
    "transfer-psg",
    "orientation-check",
];

struct Failure {
    status: Status,
    payload: Value,
}

type CmdResult = Result<(Status, Value), Failure>;

fn fail(msg: impl Into<String>) -> Failure {
    Failure {
        status: Status::Fail,
        payload: json!({ "error": msg.into() }),
    }
}

fn weyl_status(e: &WeylError) -> Status {
    match e {
        WeylError::SteinbergSingular
        | WeylError::NonPolynomialCoefficient
        | WeylError::NonInvariantCoefficient
        | WeylError::ReconstructionFailure
        | WeylError::SupportViolation => Status::PaperConsistencyFailure,
        _ => Status::Fail,
    }
}

fn toroidal_status(e: &ToroidalError) -> Status {
    match e {
        ToroidalError::FormMismatch { .. }
        | ToroidalError::NotDivisible { .. }
        | ToroidalError::CoefficientFamily { .. }
        | ToroidalError::NonPolynomialCoefficient { .. }
        | ToroidalError::NonInvariantCoefficient { .. }
        | ToroidalError::ReconstructionFailure { .. }
        | ToroidalError::MultiplicationMismatch { .. }
        | ToroidalError::PullbackInvalid { .. }
        | ToroidalError::ProductCoefficientMismatch { .. }
        | ToroidalError::IndicatorMismatch { .. } => Status::PaperConsistencyFailure,
        ToroidalError::Weyl(w) => weyl_status(w),
        _ => Status::Fail,
    }
}

fn toroidal_failure(e: &ToroidalError) -> Failure {
    Failure {
        status: toroidal_status(e),
        payload: json!({ "error": e.to_string() }),
    }
}

fn group(problem: &Problem) -> Result<WeylGroup, Failure> {
    weyl::weyl_group(problem.datum.clone()).map_err(|e| fail(e.to_string()))
}

fn basis(g: &WeylGroup) -> Result<SteinbergBasis, Failure> {
    weyl::steinberg_basis(g).map_err(|e| Failure {
        status: weyl_status(&e),
        payload: json!({ "error": e.to_string() }),
    })
}

fn payload_obj<'a>(payload: Option<&'a Value>) -> Result<&'a Map<String, Value>, Failure> {
    payload
        .and_then(Value::as_object)
        .ok_or_else(|| fail("missing payload object"))
}

/// Read a class payload: an object mapping each cone index to canonical
/// Laurent text with the given exponent rank.
fn parse_class(map: &Map<String, Value>, key: &str, m: usize, rank: usize) -> Result<Vec<LaurentPoly>, Failure> {
    let obj = map
        .get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| fail(format!("payload is missing the {key:?} object")))?;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let text = obj
            .get(&i.to_string())
            .and_then(Value::as_str)
            .ok_or_else(|| fail(format!("{key}/{i}: missing Laurent text")))?;
        let p: LaurentPoly = text
            .parse()
            .map_err(|e: kring::laurent::LaurentError| fail(format!("{key}/{i}: {e}")))?;
        let p = if p.is_zero() {
            LaurentPoly::zero(rank)
        } else if p.rank() != rank {
            return Err(fail(format!(
                "{key}/{i}: expected {rank} exponent coordinates, got {}",
                p.rank()
            )));
        } else {
            p
        };
        out.push(p);
    }
    Ok(out)
}

fn class_json(values: &[LaurentPoly]) -> Value {
    let mut obj = Map::new();
    for (i, v) in values.iter().enumerate() {
        obj.insert(i.to_string(), Value::String(v.to_string()));
    }
    Value::Object(obj)
}

fn require_nu<'a>(psg: &'a Psg, which: &str) -> Result<&'a Vec<Coord>, Failure> {
    let v = match which {
        "nu0" => &psg.nu0,
        "nu1" => &psg.nu1,
        _ => &psg.nu2,
    };
    v.as_ref()
        .ok_or_else(|| fail(format!("problem psg is missing {which}")))
}

fn cmd_check_cellular(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let nu0 = require_nu(&problem.psg, "nu0")?;
    let (full, _) = weyl::orbit_fan(&g, &problem.fan_plus).map_err(|e| fail(e.to_string()))?;
    let rep = fan::cellularity_report(&full, nu0).map_err(|e| fail(e.to_string()))?;
    let status = if rep.verdict { Status::Ok } else { Status::Fail };
    let payload = serde_json::to_value(&rep).expect("report serializes");
    Ok((status, payload))
}

fn cmd_gkm_graph(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let tg = toroidal::toroidal_gkm_graph(&g, &problem.fan_plus).map_err(|e| toroidal_failure(&e))?;
    let mut by_type = Map::new();
    for t in [
        toroidal::EdgeType::ClosedOrbitLeft,
        toroidal::EdgeType::ClosedOrbitRight,
        toroidal::EdgeType::SimpleWall,
        toroidal::EdgeType::InteriorWall,
    ] {
        let count = tg.edge_types.iter().filter(|&&x| x == t).count();
        by_type.insert(t.tag().to_string(), json!(count));
    }
    let edges: Vec<Value> = tg
        .graph
        .edges
        .iter()
        .zip(&tg.edge_types)
        .map(|(e, t)| {
            json!({
                "a": tg.graph.labels[e.a],
                "b": tg.graph.labels[e.b],
                "character": e.character,
                "type": t.tag(),
            })
        })
        .collect();
    Ok((
        Status::Ok,
        json!({
            "vertices": tg.vertices.len(),
            "edges": tg.graph.edges.len(),
            "by_type": by_type,
            "edge_list": edges,
        }),
    ))
}

fn cmd_membership(problem: &Problem, payload: Option<&Value>) -> CmdResult {
    let g = group(problem)?;
    let m = problem.fan_plus.maximal_cones().len();
    let values = parse_class(payload_obj(payload)?, "class", m, 2 * g.datum.rank())?;
    match toroidal::gg_membership(&g, &problem.fan_plus, &values) {
        Ok(()) => Ok((Status::Ok, json!({ "member": true }))),
        Err(e) => Ok((
            toroidal_status(&e),
            json!({ "member": false, "witness": e.to_string() }),
        )),
    }
}

fn cmd_symmetrize(problem: &Problem, payload: Option<&Value>) -> CmdResult {
    let g = group(problem)?;
    let m = problem.fan_plus.maximal_cones().len();
    let values = parse_class(payload_obj(payload)?, "class", m, g.datum.rank())?;
    let sym = gkm::symmetrize(&g, &problem.fan_plus, &values).map_err(|e| fail(e.to_string()))?;
    let labels: Vec<Value> = sym.labels.iter().map(|&(w, si)| json!([w, si])).collect();
    let out: Vec<Value> = sym
        .values
        .iter()
        .map(|v| Value::String(v.to_string()))
        .collect();
    Ok((Status::Ok, json!({ "labels": labels, "values": out })))
}

fn cmd_decompose(problem: &Problem, payload: Option<&Value>) -> CmdResult {
    let g = group(problem)?;
    let basis = basis(&g)?;
    let m = problem.fan_plus.maximal_cones().len();
    let values = parse_class(payload_obj(payload)?, "class", m, 2 * g.datum.rank())?;
    let dec = toroidal::decompose(&g, &basis, &problem.fan_plus, &values)
        .map_err(|e| toroidal_failure(&e))?;
    let mut coeffs = Map::new();
    for (v, family) in dec.coefficients.iter().enumerate() {
        let texts: Vec<Value> = family.iter().map(|c| Value::String(c.to_string())).collect();
        coeffs.insert(v.to_string(), Value::Array(texts));
    }
    let words: Vec<Value> = (0..g.len()).map(|w| json!(g.elements[w].word)).collect();
    Ok((
        Status::Ok,
        json!({ "coefficients": coeffs, "elements": words }),
    ))
}

fn cmd_multiply(problem: &Problem, payload: Option<&Value>) -> CmdResult {
    let g = group(problem)?;
    let m = problem.fan_plus.maximal_cones().len();
    let obj = payload_obj(payload)?;
    let left = parse_class(obj, "left", m, 2 * g.datum.rank())?;
    let right = parse_class(obj, "right", m, 2 * g.datum.rank())?;
    for (name, cls) in [("left", &left), ("right", &right)] {
        toroidal::gg_membership(&g, &problem.fan_plus, cls)
            .map_err(|e| fail(format!("{name} factor is not a valid class: {e}")))?;
    }
    let product = toroidal::multiply(&left, &right);
    // closure under products is automatic; failing here is not user error
    toroidal::gg_membership(&g, &problem.fan_plus, &product).map_err(|e| Failure {
        status: Status::PaperConsistencyFailure,
        payload: json!({ "error": format!("product left the ring: {e}") }),
    })?;
    Ok((Status::Ok, json!({ "product": class_json(&product) })))
}

fn cmd_multstr_check(problem: &Problem, payload: Option<&Value>, threads: usize) -> CmdResult {
    let g = group(problem)?;
    let basis = basis(&g)?;
    let k = g.len();
    let pairs: Vec<(usize, usize)> = match payload.and_then(|p| p.get("pairs")) {
        None => (0..k).flat_map(|v| (0..k).map(move |v2| (v, v2))).collect(),
        Some(spec) => {
            let arr = spec
                .as_array()
                .ok_or_else(|| fail("pairs: expected an array"))?;
            let mut out = Vec::new();
            for (i, pv) in arr.iter().enumerate() {
                let pair = int_vec(pv, &format!("pairs/{i}")).map_err(|e| fail(e.to_string()))?;
                if pair.len() != 2 || pair.iter().any(|&x| x < 0 || x as usize >= k) {
                    return Err(fail(format!("pairs/{i}: expected two element indices below {k}")));
                }
                out.push((pair[0] as usize, pair[1] as usize));
            }
            out
        }
    };
    let workers = threads.max(1).min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(workers).max(1);
    let results: Vec<Option<ToroidalError>> = std::thread::scope(|s| {
        let mut handles = Vec::new();
        for ch in pairs.chunks(chunk) {
            let g = &g;
            let basis = &basis;
            let fan_plus = &problem.fan_plus;
            handles.push(s.spawn(move || {
                ch.iter()
                    .map(|&(v, v2)| toroidal::multstr_check(g, basis, fan_plus, v, v2).err())
                    .collect::<Vec<_>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    for ((v, v2), r) in pairs.iter().zip(&results) {
        if let Some(e) = r {
            return Ok((
                toroidal_status(e),
                json!({ "pair": [v, v2], "witness": e.to_string() }),
            ));
        }
    }
    Ok((Status::Ok, json!({ "pairs_checked": pairs.len() })))
}

fn cmd_relwond_check(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let basis = basis(&g)?;
    toroidal::relwond_check(&g, &basis, &problem.fan_plus).map_err(|e| toroidal_failure(&e))?;
    Ok((Status::Ok, json!({ "pullbacks_valid": true, "indicators_round_trip": true })))
}

fn cmd_ordinary_rank(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let k = toroidal::ordinary_k(&g, &problem.fan_plus).map_err(|e| toroidal_failure(&e))?;
    Ok((Status::Ok, json!({ "rank": k.rank })))
}

fn cmd_steinberg(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let basis = basis(&g)?;
    let elements: Vec<Value> = (0..g.len())
        .map(|w| {
            json!({
                "word": g.elements[w].word,
                "value": basis.polys[w].to_string(),
            })
        })
        .collect();
    let c_sets: Vec<Value> = weyl::simple_subsets(g.datum.semisimple_rank())
        .into_iter()
        .map(|subset| {
            let members = weyl::c_set(&g, &subset);
            let subset: Vec<usize> = subset.into_iter().collect();
            json!({ "descents": subset, "elements": members })
        })
        .collect();
    Ok((
        Status::Ok,
        json!({
            "convention": basis.convention,
            "elements": elements,
            "c_sets": c_sets,
        }),
    ))
}

fn cmd_transfer_psg(problem: &Problem, payload: Option<&Value>) -> CmdResult {
    let g = group(problem)?;
    let direction = payload
        .and_then(|p| p.get("direction"))
        .and_then(Value::as_str)
        .unwrap_or("to-toroidal");
    match direction {
        "to-toroidal" => {
            let nu0 = require_nu(&problem.psg, "nu0")?;
            let (full, _) =
                weyl::orbit_fan(&g, &problem.fan_plus).map_err(|e| fail(e.to_string()))?;
            let (nu1, nu2) =
                toroidal::transfer_psg_to_toroidal(&g, &full, nu0, problem.psg.nu2.as_deref())
                    .map_err(|e| toroidal_failure(&e))?;
            Ok((Status::Ok, json!({ "nu1": nu1, "nu2": nu2 })))
        }
        "to-toric" => {
            let nu1 = require_nu(&problem.psg, "nu1")?;
            let nu2 = require_nu(&problem.psg, "nu2")?;
            let nu0 = toroidal::transfer_psg_to_toric(&g, nu1, nu2);
            Ok((Status::Ok, json!({ "nu0": nu0 })))
        }
        other => Err(fail(format!("unknown direction {other:?}"))),
    }
}

fn cmd_orientation_check(problem: &Problem) -> CmdResult {
    let g = group(problem)?;
    let (nu1, nu2) = match (&problem.psg.nu1, &problem.psg.nu2) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => {
            let nu0 = require_nu(&problem.psg, "nu0")?;
            let (full, _) =
                weyl::orbit_fan(&g, &problem.fan_plus).map_err(|e| fail(e.to_string()))?;
            toroidal::transfer_psg_to_toroidal(&g, &full, nu0, problem.psg.nu2.as_deref())
                .map_err(|e| toroidal_failure(&e))?
        }
    };
    let tg = toroidal::toroidal_gkm_graph(&g, &problem.fan_plus).map_err(|e| toroidal_failure(&e))?;
    let rep = toroidal::orientation_check(&g, &tg, &nu1, &nu2).map_err(|e| toroidal_failure(&e))?;
    let status = if rep.ok { Status::Ok } else { Status::Fail };
    let payload = serde_json::to_value(&rep).expect("report serializes");
    Ok((status, payload))
}

/// Dispatch one analysis over a loaded problem. The payload is the parsed
/// `--payload` file when one was given. Thread count only affects how
/// independent checks are batched, never the report bytes.
pub fn run(problem: &Problem, command: &str, payload: Option<&Value>, threads: usize) -> Report {
    let outcome: CmdResult = match command {
        "check-cellular" => cmd_check_cellular(problem),
        "gkm-graph" => cmd_gkm_graph(problem),
        "membership" => cmd_membership(problem, payload),
        "symmetrize" => cmd_symmetrize(problem, payload),
        "decompose" => cmd_decompose(problem, payload),
        "multiply" => cmd_multiply(problem, payload),
        "multstr-check" => cmd_multstr_check(problem, payload, threads),
        "relwond-check" => cmd_relwond_check(problem),
        "ordinary-rank" => cmd_ordinary_rank(problem),
        "steinberg" => cmd_steinberg(problem),
        "transfer-psg" => cmd_transfer_psg(problem, payload),
        "orientation-check" => cmd_orientation_check(problem),
        other => Err(fail(format!(
            "unknown command {other:?}; expected one of {COMMANDS:?}"
        ))),
    };
    let (status, payload) = match outcome {
        Ok(pair) => pair,
        Err(f) => (f.status, f.payload),
    };
    Report {
        command: command.to_string(),
        status,
        payload,
    }
}
