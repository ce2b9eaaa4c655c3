//! Browser front end for a few toolkit computations.
//!
//! Every entry point returns a JSON document as a string, so the page only
//! needs `JSON.parse`. The plain functions in [`ops`] carry the logic and
//! are tested natively; the `#[wasm_bindgen]` wrappers only translate errors.

use wasm_bindgen::prelude::*;

pub mod ops {
    use iwasawa_core::characters::CInvariant;
    use iwasawa_core::finite::{bruhat_census, bruhat_classify, enumerate_group};
    use iwasawa_core::iwasawa::obstruction_coefficients;
    use iwasawa_core::series::{boundedness_floor, log_series_power};
    use iwasawa_core::PrecisionContext;
    use serde_json::{json, Value};

    /// Largest truncation degree and group the page is allowed to request.
    pub const MAX_TRUNC: usize = 256;
    pub const MAX_ELEMENTS: u64 = 20_000;

    fn context(p: u32, prec: u32, trunc: usize) -> Result<PrecisionContext, String> {
        if trunc > MAX_TRUNC {
            return Err(format!("truncation degree is capped at {MAX_TRUNC} in the demo"));
        }
        PrecisionContext::new(u64::from(p), prec, trunc).map_err(|e| e.to_string())
    }

    /// Coefficient valuations of `log(1 + x)^m` modulo `x^trunc`, and the
    /// boundedness verdict read off them.
    pub fn log_profile(p: u32, m: u32, trunc: usize, prec: u32) -> Result<Value, String> {
        let ctx = context(p, prec, trunc)?;
        let f = log_series_power(&ctx, m);
        let valuations: Vec<String> = f.coeffs().iter().map(|c| c.valuation().to_string()).collect();
        Ok(json!({
            "p": p,
            "m": m,
            "trunc": trunc,
            "valuations": valuations,
            "boundedness": boundedness_floor(&f),
        }))
    }

    /// Coefficients of `sum_j (-1)^j C(l, j) (1 + j y)^c` for `c = num/den`.
    pub fn obstruction(p: u32, num: i32, den: i32, ell: u32, degree: usize, prec: u32) -> Result<Value, String> {
        let ctx = context(p, prec, degree + 1)?;
        let c = ctx.ratio(i128::from(num), i128::from(den)).map_err(|e| e.to_string())?;
        let inv = CInvariant { c, derivation_precision: i64::from(prec) };
        let ob = obstruction_coefficients(&ctx, &inv, ell, degree).map_err(|e| e.to_string())?;
        let valuations: Vec<Option<i64>> =
            ob.coefficients.iter().map(|v| (!v.is_exact_zero()).then(|| v.min_valuation())).collect();
        Ok(json!({
            "c": format!("{num}/{den}"),
            "ell": ell,
            "coefficients": ob.coefficients.iter().map(|v| v.truncate_abs(i64::from(prec)).to_string()).collect::<Vec<_>>(),
            "valuations": valuations,
            "first_nonvanishing": ob.first_nonvanishing,
            "vanishes": ob.vanishes,
        }))
    }

    /// Bruhat census of `GL2(Z/p^n)`; at level 1 also the cell of every
    /// element, in enumeration order.
    pub fn bruhat(p: u32, level: u32) -> Result<Value, String> {
        let p = u64::from(p);
        match iwasawa_core::finite::group::group_order(p, level) {
            Some(n) if n <= MAX_ELEMENTS => {}
            _ => return Err(format!("GL2(Z/{p}^{level}) is too large for the demo")),
        }
        let census = bruhat_census(p, level).map_err(|e| e.to_string())?;
        let cells = if level == 1 {
            let group = enumerate_group(p, level).map_err(|e| e.to_string())?;
            group.iter().map(|g| json!({ "entries": g.entries(), "cell": bruhat_classify(g) })).collect()
        } else {
            Vec::new()
        };
        Ok(json!({ "census": census, "cells": cells }))
    }
}

fn respond(result: Result<serde_json::Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = logProfile)]
pub fn log_profile(p: u32, m: u32, trunc: usize, prec: u32) -> Result<String, JsValue> {
    respond(ops::log_profile(p, m, trunc, prec))
}

#[wasm_bindgen]
pub fn obstruction(p: u32, num: i32, den: i32, ell: u32, degree: usize, prec: u32) -> Result<String, JsValue> {
    respond(ops::obstruction(p, num, den, ell, degree, prec))
}

#[wasm_bindgen]
pub fn bruhat(p: u32, level: u32) -> Result<String, JsValue> {
    respond(ops::bruhat(p, level))
}

#[cfg(test)]
mod tests {
    use super::ops;

    #[test]
    fn log_profile_is_unbounded() {
        let v = ops::log_profile(3, 1, 30, 12).unwrap();
        assert_eq!(v["valuations"][3], "-1");
        assert_eq!(v["valuations"][9], "-2");
        assert!(v["boundedness"].get("unbounded_evidence").is_some());
        assert!(ops::log_profile(3, 1, 10_000, 12).is_err());
    }

    #[test]
    fn obstruction_vanishes_for_small_integers() {
        let v = ops::obstruction(3, 1, 1, 2, 6, 12).unwrap();
        assert_eq!(v["vanishes"], true);
        let v = ops::obstruction(3, 1, 4, 1, 6, 12).unwrap();
        assert_eq!(v["vanishes"], false);
        assert!(ops::obstruction(3, 1, 3, 1, 6, 12).is_err());
    }

    #[test]
    fn bruhat_cells_cover_the_group() {
        let v = ops::bruhat(3, 1).unwrap();
        assert_eq!(v["census"]["order"], 48);
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 48);
        let in_b = cells.iter().filter(|c| c["cell"] == "b").count();
        assert_eq!(in_b, v["census"]["cell_b"].as_u64().unwrap() as usize);
        assert!(cells.iter().all(|c| c["cell"] == "b" || c["cell"] == "bw_p"));
        assert!(ops::bruhat(7, 3).is_err());
    }
}
