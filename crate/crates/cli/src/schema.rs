//! Shipped output schema and a validator for the subset of JSON Schema it
//! uses: `type`, `properties`, `required`, `items`, `enum`.

use serde_json::Value;

/// The schema document for every command's JSON output, keyed by command.
pub const OUTPUT_SCHEMA: &str = include_str!("../schema/output.schema.json");

/// Validate a value against one command's schema entry.
pub fn validate_output(command: &str, value: &Value) -> Result<(), String> {
    let doc: Value =
        serde_json::from_str(OUTPUT_SCHEMA).map_err(|e| format!("schema parse: {e}"))?;
    let schema = doc
        .get(command)
        .ok_or_else(|| format!("no schema for command '{command}'"))?;
    validate(value, schema, command)
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn validate(value: &Value, schema: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "number" => value.is_number(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unsupported schema type '{other}'")),
        };
        if !ok {
            return Err(format!(
                "{path}: expected {ty}, found {}",
                type_name(value)
            ));
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{path}: value {value} not in enum"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required {
            let key = key.as_str().unwrap_or_default();
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required property '{key}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(v, sub, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(v, items, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn validator_accepts_and_rejects() {
        let good = json!({
            "schema": 1, "command": "closed-form", "k": [2,1], "domain": "ball",
            "known": true, "value": 0.25, "expression": "2^(-2)", "provenance": "x"
        });
        assert!(validate_output("closed-form", &good).is_ok());
        let bad = json!({"schema": 2, "command": "closed-form"});
        assert!(validate_output("closed-form", &bad).is_err());
        let wrong_type = json!({
            "schema": 1, "command": "closed-form", "k": "2,1", "domain": "ball", "known": true
        });
        assert!(validate_output("closed-form", &wrong_type).is_err());
    }
}
