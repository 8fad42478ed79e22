//! Prompt templates with `{{name}}` placeholders.

use crate::error::{Error, Result};

pub const SYSTEM: &str = include_str!("../../assets/prompts/system.txt");
pub const COMPLETE_DOMAIN: &str = include_str!("../../assets/prompts/complete_domain.txt");
pub const PROPOSE_EFFECTS: &str = include_str!("../../assets/prompts/propose_effects.txt");

/// Substitute every placeholder; unknown or unfilled placeholders are errors.
pub fn render(template: &str, values: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let end = rest[start..].find("}}").ok_or_else(|| Error::Config("unterminated placeholder in prompt template".into()))? + start;
        let key = rest[start + 2..end].trim();
        let v = values
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| Error::Config(format!("no value for prompt placeholder `{key}`")))?;
        out.push_str(v.1);
        rest = &rest[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_rejects_missing_values() {
        assert_eq!(render("a {{x}} b {{ y }}", &[("x", "1"), ("y", "2")]).unwrap(), "a 1 b 2");
        assert!(render("{{x}}", &[]).is_err());
        let p = render(COMPLETE_DOMAIN, &[("partial_domain", "(define)"), ("demo_digest", "1. pick")]).unwrap();
        assert!(p.contains("(define)") && !p.contains("{{"));
    }
}
