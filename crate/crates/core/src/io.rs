//! Canonical JSON for polynomials, walks, moment tables and matrices.
//!
//! Objects are emitted through `serde_json::Value`, whose maps keep keys
//! sorted, and scalars are strings from [`Scalar::to_scalar_string`], so the
//! same value always serializes to the same bytes.

use std::path::Path;

use serde_json::{json, Value};

use crate::cone::Boundary;
use crate::error::{Error, Result};
use crate::laplace::BoundaryMatrix;
use crate::poly::Poly;
use crate::scalar::{parse_rational, rational_to_string, Scalar};
use crate::walk::{Atom, MomentTable, Walk};

pub fn to_canonical_string(v: &Value, pretty: bool) -> String {
    let mut s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) }.expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::parse(what, format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn read_json_file(path: &Path) -> Result<Value> {
    let what = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(&what, e.to_string()))?;
    parse_json(&text, &what)
}

/// Field access with error messages naming the field path.
struct Fields<'a> {
    what: &'a str,
}

impl<'a> Fields<'a> {
    fn err(&self, field: &str, detail: impl std::fmt::Display) -> Error {
        Error::parse(self.what, format!("field `{field}`: {detail}"))
    }

    fn get<'v>(&self, v: &'v Value, key: &str, field: &str) -> Result<&'v Value> {
        v.get(key).ok_or_else(|| self.err(field, "missing"))
    }

    fn array<'v>(&self, v: &'v Value, field: &str) -> Result<&'v Vec<Value>> {
        v.as_array().ok_or_else(|| self.err(field, "expected an array"))
    }

    fn uint(&self, v: &Value, field: &str) -> Result<u64> {
        v.as_u64().ok_or_else(|| self.err(field, "expected a non-negative integer"))
    }

    fn int(&self, v: &Value, field: &str) -> Result<i64> {
        v.as_i64().ok_or_else(|| self.err(field, "expected an integer"))
    }

    fn scalar<F: Scalar>(&self, v: &Value, field: &str) -> Result<F> {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_i64() => n.to_string(),
            _ => return Err(self.err(field, "expected a scalar string")),
        };
        F::parse_scalar(&s).map_err(|e| self.err(field, e))
    }
}

pub fn poly_to_json<F: Scalar>(p: &Poly<F>) -> Value {
    let terms: Vec<Value> = p.terms().map(|(&(i, j), c)| json!({"i": i, "j": j, "c": c.to_scalar_string()})).collect();
    json!({"backend": F::backend().to_string(), "terms": terms})
}

pub fn poly_from_json<F: Scalar>(v: &Value, what: &str) -> Result<Poly<F>> {
    let f = Fields { what };
    let mut p = Poly::zero();
    for (n, t) in f.array(f.get(v, "terms", "terms")?, "terms")?.iter().enumerate() {
        let at = |k: &str| format!("terms[{n}].{k}");
        let i = f.uint(f.get(t, "i", &at("i"))?, &at("i"))? as u32;
        let j = f.uint(f.get(t, "j", &at("j"))?, &at("j"))? as u32;
        let c: F = f.scalar(f.get(t, "c", &at("c"))?, &at("c"))?;
        p.add_term(i, j, c);
    }
    Ok(p)
}

pub fn walk_to_json(w: &Walk) -> Value {
    let atoms: Vec<Value> = w.atoms().iter().map(|a| json!({"dy": [a.dy.0, a.dy.1], "p": rational_to_string(&a.p)})).collect();
    json!({"atoms": atoms})
}

pub fn walk_from_json(v: &Value, what: &str) -> Result<Walk> {
    let f = Fields { what };
    let mut atoms = Vec::new();
    for (n, a) in f.array(f.get(v, "atoms", "atoms")?, "atoms")?.iter().enumerate() {
        let dy_field = format!("atoms[{n}].dy");
        let dy = f.array(f.get(a, "dy", &dy_field)?, &dy_field)?;
        if dy.len() != 2 {
            return Err(f.err(&dy_field, "expected two integers"));
        }
        let dy = (f.int(&dy[0], &dy_field)?, f.int(&dy[1], &dy_field)?);
        let p_field = format!("atoms[{n}].p");
        let p = match f.get(a, "p", &p_field)? {
            Value::String(s) => parse_rational(s).map_err(|e| f.err(&p_field, e))?,
            _ => return Err(f.err(&p_field, "expected a rational string such as \"1/4\"")),
        };
        atoms.push(Atom { dy, p });
    }
    Walk::new(atoms)
}

pub fn moments_to_json<F: Scalar>(mu: &MomentTable<F>) -> Value {
    let entries: Vec<Value> = mu.entries().map(|(&(k, l), v)| json!({"k": k, "l": l, "v": v.to_scalar_string()})).collect();
    json!({"backend": F::backend().to_string(), "order": mu.order, "mu": entries})
}

pub fn moments_from_json<F: Scalar>(v: &Value, what: &str) -> Result<MomentTable<F>> {
    let f = Fields { what };
    let order = f.uint(f.get(v, "order", "order")?, "order")? as usize;
    let mut entries = Vec::new();
    for (n, e) in f.array(f.get(v, "mu", "mu")?, "mu")?.iter().enumerate() {
        let at = |k: &str| format!("mu[{n}].{k}");
        let k = f.uint(f.get(e, "k", &at("k"))?, &at("k"))? as u32;
        let l = f.uint(f.get(e, "l", &at("l"))?, &at("l"))? as u32;
        let val: F = f.scalar(f.get(e, "v", &at("v"))?, &at("v"))?;
        entries.push(((k, l), val));
    }
    MomentTable::new(order, entries).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(what, other.to_string()),
    })
}

pub fn boundary_to_json<F: Scalar>(b: &Boundary<F>) -> Value {
    match b {
        Boundary::Slope(b) => json!({"kind": "slope", "b": b.to_scalar_string()}),
        Boundary::Vertical => json!({"kind": "vertical"}),
        Boundary::HalfPlane => json!({"kind": "half-plane"}),
    }
}

pub fn matrix_to_json<F: Scalar>(m: &BoundaryMatrix<F>) -> Value {
    let rows: Vec<Value> = m.rows.iter().map(|r| Value::from(r.iter().map(|v| v.to_scalar_string()).collect::<Vec<_>>())).collect();
    json!({"backend": F::backend().to_string(), "n": m.n, "boundary": boundary_to_json(&m.boundary), "rows": rows})
}

pub fn matrix_rows_from_json<F: Scalar>(v: &Value, what: &str) -> Result<Vec<Vec<F>>> {
    let f = Fields { what };
    f.array(f.get(v, "rows", "rows")?, "rows")?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let field = format!("rows[{i}]");
            f.array(r, &field)?.iter().enumerate().map(|(j, x)| f.scalar(x, &format!("rows[{i}][{j}]"))).collect()
        })
        .collect()
}

pub fn scalars_to_json<F: Scalar>(v: &[F]) -> Value {
    Value::from(v.iter().map(|x| x.to_scalar_string()).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{make_cone, ConeSpec};
    use crate::laplace::build_matrix;
    use crate::scalar::{BigFloat, BigRational, Quad};
    use crate::walk::{builtin_walk, walk_moments};
    use proptest::prelude::*;

    type Q = BigRational;

    #[test]
    fn poly_round_trip_exact() {
        let p: Poly<Quad<3>> = crate::cone::u_poly(5) + Poly::monomial(0, 0, Quad::<3>::from_ratio(-7, 3));
        let s = to_canonical_string(&poly_to_json(&p), false);
        let back: Poly<Quad<3>> = poly_from_json(&parse_json(&s, "x").unwrap(), "x").unwrap();
        assert_eq!(back, p);
        assert_eq!(to_canonical_string(&poly_to_json(&back), false), s);
        assert!(s.starts_with("{\"backend\":\"quad:3\",\"terms\":"));
    }

    #[test]
    fn walk_and_moments_round_trip() {
        let w = builtin_walk(4).unwrap();
        let v = walk_to_json(&w);
        assert_eq!(walk_from_json(&v, "w").unwrap(), w);
        let (_, mu) = walk_moments::<Q>(&w, 5).unwrap();
        let back: MomentTable<Q> = moments_from_json(&moments_to_json(&mu), "m").unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn float_round_trip_is_close() {
        type F = BigFloat<256>;
        let p: Poly<F> = crate::cone::u_poly(3).scale(&F::from_ratio(1, 3));
        let back: Poly<F> = poly_from_json(&poly_to_json(&p), "x").unwrap();
        assert!((back - &p).is_negligible(1.0));
    }

    #[test]
    fn matrix_json() {
        let m = build_matrix::<Q>(3, &ConeSpec::from_slope(Q::from_int(1)).unwrap()).unwrap();
        let v = matrix_to_json(&m);
        assert_eq!(matrix_rows_from_json::<Q>(&v, "m").unwrap(), m.rows);
        assert_eq!(v["boundary"]["b"], "1");
        let vert = build_matrix::<Q>(2, &make_cone(2).unwrap()).unwrap();
        assert_eq!(matrix_to_json(&vert)["boundary"]["kind"], "vertical");
    }

    #[test]
    fn parse_errors_name_location() {
        let e = parse_json("{\n  \"terms\": [\n", "f.json").unwrap_err();
        assert!(e.to_string().contains("f.json") && e.to_string().contains("line 3"), "{e}");
        let v = parse_json(r#"{"terms":[{"i":1,"j":0,"c":"1/2"},{"i":0,"j":1,"c":"x"}]}"#, "g.json").unwrap();
        let e = poly_from_json::<Q>(&v, "g.json").unwrap_err();
        assert!(e.to_string().contains("terms[1].c"), "{e}");
        let v = parse_json(r#"{"atoms":[{"dy":[1,0],"p":0.5}]}"#, "w.json").unwrap();
        assert!(walk_from_json(&v, "w.json").unwrap_err().to_string().contains("atoms[0].p"));
        let v = parse_json(r#"{"atoms":[{"dy":[1,0],"p":"1/2"},{"dy":[0,1],"p":"1/2"}]}"#, "w.json").unwrap();
        assert_eq!(walk_from_json(&v, "w.json").unwrap_err().code(), "invalid-walk");
    }

    proptest! {
        #[test]
        fn rational_poly_round_trip(terms in proptest::collection::vec((0u32..6, 0u32..6, -50i64..50, 1i64..20), 0..12)) {
            let p: Poly<Q> = Poly::from_terms(terms.iter().map(|&(i, j, n, d)| ((i, j), Q::from_ratio(n, d))));
            let s = to_canonical_string(&poly_to_json(&p), true);
            let back: Poly<Q> = poly_from_json(&parse_json(&s, "p").unwrap(), "p").unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(to_canonical_string(&poly_to_json(&back), true), s);
        }
    }
}
