//! Shared report plumbing: number formatting and the convention notes
//! embedded in every machine-readable report.

use serde::Serializer;

/// Notes attached to every report so the finite/infinite gap stays visible.
pub const CONVENTION_NOTES: &[&str] = &[
    "all suprema and sums range over the stored truncation; every quantity is labelled with its truncation depth",
    "the inner product conjugates its second argument: <f, g> = sum f(v) conj(g(v)) weight(v)",
    "weights must be strictly positive; zero weights are rejected at load time",
    "exact norms of non-injective maps use sup_u [weight(preimage(u)) / weight(u)]^(1/p), a derived formula cross-checked by the dense oracle",
    "compactness and Schatten verdicts are finite-depth diagnostics, not proofs about the infinite tree",
];

/// Decimal string with 15 significant digits.
pub fn sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.14e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        sci
    }
}

pub mod num {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&sig15(*x))
    }
}

pub mod num_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&sig15(*x))?;
        }
        seq.end()
    }
}

pub mod num_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&sig15(*x)),
            None => s.serialize_none(),
        }
    }
}
