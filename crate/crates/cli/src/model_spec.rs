//! Model specifications: `glm:<json or file>`, `mlp:<json or file>`,
//! `extern:<command>`.

use removal_attrib::models::{ExternalModel, GeneralizedLinearModel, MlpModel, Model};

use crate::config::{ConfigError, Result};

fn json_text(body: &str) -> Result<String> {
    let trimmed = body.trim_start();
    if trimmed.starts_with('{') {
        return Ok(body.to_string());
    }
    std::fs::read_to_string(body).map_err(|e| ConfigError(format!("cannot read model file {body:?}: {e}")))
}

pub fn parse_model(spec: &str, dim: usize) -> Result<Box<dyn Model>> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| ConfigError(format!("model spec {spec:?} must start with glm:, mlp: or extern:")))?;
    let model: Box<dyn Model> = match kind {
        "glm" => {
            let glm: GeneralizedLinearModel = serde_json::from_str(&json_text(body)?)
                .map_err(|e| ConfigError(format!("bad glm parameters: {e}")))?;
            Box::new(glm)
        }
        "mlp" => {
            let raw: MlpModel = serde_json::from_str(&json_text(body)?)
                .map_err(|e| ConfigError(format!("bad mlp parameters: {e}")))?;
            Box::new(MlpModel::new(raw.layers, raw.output)?)
        }
        "extern" => Box::new(ExternalModel::spawn(body, dim)?),
        other => {
            return Err(ConfigError(format!(
                "unknown model kind {other:?} (valid: glm, mlp, extern)"
            )))
        }
    };
    if model.dim() != dim {
        return Err(ConfigError(format!(
            "model expects {} features but the input has {dim}",
            model.dim()
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_glm() {
        let m = parse_model(r#"glm:{"coefficients":[1,2],"link":"identity"}"#, 2).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 3.0);
        assert!(parse_model(r#"glm:{"coefficients":[1,2],"link":"identity"}"#, 3).is_err());
    }

    #[test]
    fn mlp_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        std::fs::write(
            &path,
            r#"{"layers":[{"inputs":2,"outputs":1,"weights":[1,-1],"bias":[0.5]}],"output":"identity"}"#,
        )
        .unwrap();
        let m = parse_model(&format!("mlp:{}", path.display()), 2).unwrap();
        assert_eq!(m.predict(&[2.0, 1.0]).unwrap(), 1.5);
    }

    #[test]
    fn malformed_specs() {
        assert!(parse_model("linear", 2).is_err());
        assert!(parse_model("tree:{}", 2).is_err());
        assert!(parse_model("mlp:{\"layers\":[]}", 2).is_err());
    }
}
