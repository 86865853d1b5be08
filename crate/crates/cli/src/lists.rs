//! Grid list syntax: comma-separated items, each a value or `start..end..step`.

use std::fmt::Display;
use std::str::FromStr;

use hyperpi_core::arithmetic::BackendSpec;

/// A parsed list argument, kept whole so clap does not treat it as repeated values.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_number<T: FromStr>(text: &str) -> Result<T, String>
where
    T::Err: Display,
{
    text.trim()
        .parse::<T>()
        .map_err(|e| format!("`{}`: {e}", text.trim()))
}

fn expand_range(item: &str) -> Result<Vec<u64>, String> {
    let parts: Vec<&str> = item.split("..").collect();
    let (start, end, step) = match parts.as_slice() {
        [a, b] => (parse_number(a)?, parse_number(b)?, 1),
        [a, b, s] => (parse_number(a)?, parse_number(b)?, parse_number(s)?),
        _ => return Err(format!("`{item}` is not a range of the form a..b or a..b..step")),
    };
    if step == 0 {
        return Err(format!("`{item}`: step must be positive"));
    }
    if start > end {
        return Err(format!("`{item}`: range start exceeds end"));
    }
    Ok((start..=end).step_by(step as usize).collect())
}

fn parse_integers(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err("empty list item".to_string());
        }
        if item.contains("..") {
            out.extend(expand_range(item)?);
        } else {
            out.push(parse_number(item)?);
        }
    }
    Ok(out)
}

/// A list of family indices. Every entry must be at least 1.
pub fn index_list(text: &str) -> Result<List<u32>, String> {
    parse_integers(text)?
        .into_iter()
        .map(|v| match u32::try_from(v) {
            Ok(0) => Err("i must be at least 1".to_string()),
            Ok(v) => Ok(v),
            Err(_) => Err(format!("i = {v} is out of range")),
        })
        .collect::<Result<_, _>>()
        .map(List)
}

/// A list of truncation limits. Every entry must be at least 1.
pub fn terms_list(text: &str) -> Result<List<u64>, String> {
    let values = parse_integers(text)?;
    if values.contains(&0) {
        return Err("N must be at least 1".to_string());
    }
    Ok(List(values))
}

pub fn backend_list(text: &str) -> Result<List<BackendSpec>, String> {
    text.split(',')
        .map(|item| {
            let spec: BackendSpec = item.trim().parse().map_err(|e| format!("{e}"))?;
            spec.validate().map_err(|e| format!("{e}"))?;
            Ok(spec)
        })
        .collect::<Result<_, _>>()
        .map(List)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(index_list("2..6..2").unwrap().0, vec![2, 4, 6]);
        assert_eq!(index_list("1,3..5").unwrap().0, vec![1, 3, 4, 5]);
        assert_eq!(index_list("2..20..1").unwrap().0.len(), 19);
        assert_eq!(terms_list("100,1000,10000").unwrap().0, vec![100, 1000, 10000]);
        assert!(index_list("0").is_err());
        assert!(index_list("5..1").is_err());
        assert!(index_list("1..5..0").is_err());
        assert!(terms_list("1,,2").is_err());
        assert!(terms_list("x").is_err());
    }

    #[test]
    fn backends() {
        let list = backend_list("f64,f64c,ap256,rational").unwrap();
        assert_eq!(list.0.len(), 4);
        assert!(backend_list("f32").is_err());
        assert!(backend_list("ap8").is_err());
    }
}
