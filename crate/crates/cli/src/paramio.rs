//! Policy parameter persistence: a dimension header followed by a flat
//! stream of little-endian 64-bit reals, trivially portable.
//!
//! Layout (all little-endian):
//!   u64                     number of layer sizes L
//!   u64 * L                 layer sizes (input, hidden.., output)
//!   u64                     activation code (0 = tanh, 1 = relu)
//!   f64 * (params + out)    mean net parameters `[w0, b0, w1, b1, ...]`,
//!                           then log_std (length = output size)

use crate::CliError;
use std::path::Path;
use symmrl::numkit::{Activation, GaussianPolicy, Mlp};

pub const POLICY_FILE: &str = "policy.bin";

pub fn save_policy(path: &Path, policy: &GaussianPolicy) -> Result<(), CliError> {
    let sizes = policy.mean_net.sizes();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(sizes.len() as u64).to_le_bytes());
    for &s in sizes {
        bytes.extend_from_slice(&(s as u64).to_le_bytes());
    }
    let act_code: u64 = match policy.mean_net.activation() {
        Activation::Tanh => 0,
        Activation::Relu => 1,
    };
    bytes.extend_from_slice(&act_code.to_le_bytes());
    for value in policy.flatten() {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::failure(format!("cannot write {}: {e}", path.display())))
}

pub fn load_policy(path: &Path) -> Result<GaussianPolicy, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::failure(format!("cannot read {}: {e}", path.display())))?;
    let corrupt = |what: &str| {
        CliError::failure(format!("corrupt parameter file {}: {what}", path.display()))
    };
    let mut offset = 0usize;
    let read_u64 = |bytes: &[u8], offset: &mut usize| -> Result<u64, CliError> {
        let end = *offset + 8;
        if end > bytes.len() {
            return Err(corrupt("truncated header"));
        }
        let v = u64::from_le_bytes(bytes[*offset..end].try_into().unwrap());
        *offset = end;
        Ok(v)
    };
    let n_sizes = read_u64(&bytes, &mut offset)? as usize;
    if n_sizes < 2 || n_sizes > 64 {
        return Err(corrupt("implausible layer count"));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(read_u64(&bytes, &mut offset)? as usize);
    }
    let activation = match read_u64(&bytes, &mut offset)? {
        0 => Activation::Tanh,
        1 => Activation::Relu,
        _ => return Err(corrupt("unknown activation code")),
    };
    let mut net =
        Mlp::zeros(&sizes, activation).map_err(|e| corrupt(&format!("bad sizes: {e}")))?;
    let act_dim = net.output_dim();
    let expected = net.param_count() + act_dim;
    let data = &bytes[offset..];
    if data.len() != expected * 8 {
        return Err(corrupt(&format!(
            "expected {expected} parameters, found {} bytes of data",
            data.len()
        )));
    }
    let flat: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    net.load_flat(&flat[..net.param_count()])
        .map_err(|e| corrupt(&e.to_string()))?;
    let policy = GaussianPolicy::new(net, flat[flat.len() - act_dim..].to_vec())
        .map_err(|e| corrupt(&e.to_string()))?;
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use symmrl::rng::rng_stream;

    #[test]
    fn save_load_round_trip_is_exact() {
        let mut rng = rng_stream(5, 1);
        let policy =
            GaussianPolicy::uniform_init(3, &[8, 4], 2, Activation::Tanh, 0.3, &mut rng).unwrap();
        let dir = std::env::temp_dir().join("symmrl-paramio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(POLICY_FILE);
        save_policy(&path, &policy).unwrap();
        let loaded = load_policy(&path).unwrap();
        assert_eq!(loaded.flatten(), policy.flatten());
        assert_eq!(loaded.mean_net.sizes(), policy.mean_net.sizes());
    }

    #[test]
    fn corrupt_files_are_load_errors() {
        let dir = std::env::temp_dir().join("symmrl-paramio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.bin");
        std::fs::write(&path, [1, 2, 3]).unwrap();
        let err = load_policy(&path).unwrap_err();
        assert!(err.to_string().contains("corrupt") || err.to_string().contains("truncated"));
    }
}
