use thiserror::Error;

use crate::model::clamp_unit;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("no line with {dim} finite numeric values found in the response")]
    NoPoints { dim: usize },
}

/// Strips decorations an LLM commonly adds around a point: a `point:` label,
/// a trailing `fitness: ...`, list markers like `1.` or `2)` and brackets.
fn strip_decorations(line: &str) -> &str {
    let mut s = line.trim();
    if let Some(idx) = s.to_ascii_lowercase().find("fitness") {
        s = &s[..idx];
    }
    let lower = s.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("point:") {
        s = &s[s.len() - rest.len()..];
    }
    s = s.trim();
    if let Some((marker, rest)) = s.split_once(char::is_whitespace) {
        let digits = marker.trim_end_matches(['.', ')', ':']);
        if digits.len() < marker.len() && !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            s = rest;
        }
    }
    s.trim_matches(|c: char| c.is_whitespace() || matches!(c, '[' | ']' | '(' | ')' | '<' | '>' | '`'))
}

fn parse_line(line: &str, dim: usize) -> Option<Vec<f64>> {
    let body = strip_decorations(line);
    let values: Vec<f64> = body
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok())
        .collect::<Option<_>>()?;
    if values.len() != dim || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(values.into_iter().map(clamp_unit).collect())
}

/// Extracts up to `n_offspring` points of length `dim` from free-form text.
///
/// Lines that are not exactly `dim` finite numbers are ignored; components are
/// clamped into `[0, 1]`. Fewer than `n_offspring` points is a partial result.
pub fn parse_response(text: &str, n_offspring: usize, dim: usize) -> Result<Vec<Vec<f64>>, ParseError> {
    let points: Vec<Vec<f64>> = text
        .lines()
        .filter_map(|l| parse_line(l, dim))
        .take(n_offspring)
        .collect();
    if points.is_empty() {
        return Err(ParseError::NoPoints { dim });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clean_lines() {
        let text = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8\n0.3,0.3,0.3,0.3,0.3,0.3,0.3,0.3";
        let pts = parse_response(text, 2, 8).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0][7], 0.8);
    }

    #[test]
    fn prose_is_ignored() {
        let text = "Here are the points:\n0.1, 0.2, 0.3, 0.4\nHope this helps!";
        assert_eq!(parse_response(text, 2, 4).unwrap(), vec![vec![0.1, 0.2, 0.3, 0.4]]);
    }

    #[test]
    fn out_of_range_is_clamped() {
        let pts = parse_response("1.7, -0.2, 0.5, 0.5", 1, 4).unwrap();
        assert_eq!(pts[0], vec![1.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn non_finite_lines_rejected() {
        assert!(parse_response("NaN, 0.1, 0.2, 0.3\ninf,0,0,0", 2, 4).is_err());
        let pts = parse_response("0.1,NaN,0.2,0.3\n0.4,0.4,0.4,0.4", 2, 4).unwrap();
        assert_eq!(pts, vec![vec![0.4; 4]]);
    }

    #[test]
    fn wrong_dimension_and_garbage() {
        assert_eq!(
            parse_response("0.1,0.2,0.3", 1, 4),
            Err(ParseError::NoPoints { dim: 4 })
        );
        assert!(parse_response("lorem ipsum", 1, 4).is_err());
        assert!(parse_response("", 1, 4).is_err());
    }

    #[test]
    fn takes_first_n() {
        let text = "0.1 0.1\n0.2 0.2\n0.3 0.3";
        assert_eq!(
            parse_response(text, 2, 2).unwrap(),
            vec![vec![0.1, 0.1], vec![0.2, 0.2]]
        );
    }

    #[test]
    fn common_decorations() {
        let text = "1. [0.1, 0.2]\n2) (0.3, 0.4)\npoint: 0.5,0.6 fitness: 0.12\n`0.7,0.8`";
        let pts = parse_response(text, 4, 2).unwrap();
        assert_eq!(
            pts,
            vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6], vec![0.7, 0.8]]
        );
    }
}
