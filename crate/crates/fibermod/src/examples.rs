//! Built-in families selectable by name.

use fibermod_core::family::{
    cylinder_family, hat_family, wrinkled_cylinder_family, zigzag_family, FamilyError, PLFamily,
    WrinkleParams,
};

pub const DEFAULT_ZIGZAG: usize = 2;
pub const DEFAULT_SUBDIV: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum ExampleError {
    #[error("unknown example `{0}` (expected hat, zigzag:n, cylinder:k or wrinkled-cylinder)")]
    Unknown(String),
    #[error("bad parameter in `{0}`")]
    Parameter(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Resolves `hat`, `zigzag[:n]`, `cylinder[:k]` or `wrinkled-cylinder[:k]`.
pub fn example_family(name: &str) -> Result<PLFamily, ExampleError> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let count = |default: usize| -> Result<usize, ExampleError> {
        arg.map_or(Ok(default), |a| {
            a.parse().map_err(|_| ExampleError::Parameter(name.to_string()))
        })
    };
    match head {
        "hat" if arg.is_none() => Ok(hat_family()),
        "zigzag" => Ok(zigzag_family(count(DEFAULT_ZIGZAG)?)?),
        "cylinder" => Ok(cylinder_family(count(DEFAULT_SUBDIV)?)?),
        "wrinkled-cylinder" => Ok(wrinkled_cylinder_family(
            &WrinkleParams::default(),
            count(DEFAULT_SUBDIV)?,
        )?),
        _ => Err(ExampleError::Unknown(name.to_string())),
    }
}

/// Names of the bundled examples.
pub fn bundled() -> Vec<String> {
    let mut names = vec!["hat".to_string()];
    names.extend((1..=4).map(|n| format!("zigzag:{n}")));
    names.push(format!("cylinder:{DEFAULT_SUBDIV}"));
    names.push("wrinkled-cylinder".to_string());
    names
}
