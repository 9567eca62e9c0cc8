//! Minimal URL handling for http(s) URLs: splitting, canonicalization for
//! alias matching, path depth, and relative reference resolution.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::CoreError;

/// Borrowed view of the components of an absolute http(s) URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlParts<'a> {
    pub scheme: &'a str,
    pub userinfo: Option<&'a str>,
    pub host: &'a str,
    pub port: Option<u16>,
    /// Empty or starting with `/`.
    pub path: &'a str,
    pub query: Option<&'a str>,
    pub fragment: Option<&'a str>,
}

fn malformed(url: &str, reason: &'static str) -> CoreError {
    CoreError::MalformedUrl {
        url: url.to_string(),
        reason,
    }
}

fn valid_host(host: &str) -> bool {
    if let Some(inner) = host.strip_prefix('[') {
        return inner.strip_suffix(']').is_some_and(|ip| {
            !ip.is_empty()
                && ip
                    .chars()
                    .all(|c| c.is_ascii_hexdigit() || c == ':' || c == '.')
        });
    }
    !host.is_empty()
        && !host.starts_with('.')
        && !host.contains("..")
        && host
            .chars()
            .all(|c| c.is_alphanumeric() || c == '-' || c == '.' || c == '_')
}

/// Splits an absolute http or https URL.
pub fn parse_url(url: &str) -> Result<UrlParts<'_>, CoreError> {
    if url.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(malformed(url, "contains whitespace or control characters"));
    }
    let (scheme, rest) = url
        .split_once("://")
        .ok_or_else(|| malformed(url, "missing scheme"))?;
    if !scheme.eq_ignore_ascii_case("http") && !scheme.eq_ignore_ascii_case("https") {
        return Err(malformed(url, "scheme must be http or https"));
    }

    let (rest, fragment) = match rest.split_once('#') {
        Some((r, f)) => (r, Some(f)),
        None => (rest, None),
    };
    let (rest, query) = match rest.split_once('?') {
        Some((r, q)) => (r, Some(q)),
        None => (rest, None),
    };
    let (authority, path) = match rest.find('/') {
        Some(i) => (&rest[..i], &rest[i..]),
        None => (rest, ""),
    };
    let (userinfo, hostport) = match authority.rsplit_once('@') {
        Some((u, h)) => (Some(u), h),
        None => (None, authority),
    };

    let (host, port) = if hostport.starts_with('[') {
        match hostport.find(']') {
            Some(end) => {
                let host = &hostport[..=end];
                match &hostport[end + 1..] {
                    "" => (host, None),
                    p => (
                        host,
                        Some(
                            p.strip_prefix(':')
                                .ok_or_else(|| malformed(url, "bad port"))?,
                        ),
                    ),
                }
            }
            None => return Err(malformed(url, "unterminated IPv6 host")),
        }
    } else {
        match hostport.rsplit_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (hostport, None),
        }
    };
    let port = match port {
        None | Some("") => None,
        Some(p) => Some(p.parse::<u16>().map_err(|_| malformed(url, "bad port"))?),
    };
    if !valid_host(host) {
        return Err(malformed(url, "invalid host"));
    }

    Ok(UrlParts {
        scheme,
        userinfo,
        host,
        port,
        path,
        query,
        fragment,
    })
}

fn default_port(scheme: &str) -> u16 {
    if scheme == "https" {
        443
    } else {
        80
    }
}

/// Canonical form used to compare URLs: lowercased scheme and host, `www.`
/// stripped, default port dropped, trailing slash removed, fragment dropped,
/// query preserved.
pub fn normalize_url(url: &str) -> Result<String, CoreError> {
    let parts = parse_url(url)?;
    let scheme = parts.scheme.to_ascii_lowercase();
    let mut host = parts.host.to_ascii_lowercase();
    while let Some(stripped) = host.strip_prefix("www.") {
        if stripped.is_empty() {
            break;
        }
        host = stripped.to_string();
    }

    let mut out = format!("{scheme}://");
    if let Some(userinfo) = parts.userinfo {
        out.push_str(userinfo);
        out.push('@');
    }
    out.push_str(&host);
    if let Some(port) = parts.port.filter(|&p| p != default_port(&scheme)) {
        out.push(':');
        out.push_str(&port.to_string());
    }
    out.push_str(parts.path.trim_end_matches('/'));
    if let Some(query) = parts.query {
        out.push('?');
        out.push_str(query);
    }
    Ok(out)
}

/// Non-empty path segments of a parsed URL.
pub fn path_segments<'a>(parts: &UrlParts<'a>) -> impl Iterator<Item = &'a str> {
    parts.path.split('/').filter(|s| !s.is_empty())
}

/// Number of non-empty path segments; unparseable URLs have depth 0.
pub fn url_depth(url: &str) -> usize {
    parse_url(url).map_or(0, |p| path_segments(&p).count())
}

/// Resolves `reference` (absolute, scheme-relative, root-relative or
/// relative) against the absolute URL `base`.
pub fn resolve(base: &str, reference: &str) -> Result<String, CoreError> {
    let reference = reference.trim();
    if reference.contains("://") {
        parse_url(reference)?;
        return Ok(reference.to_string());
    }
    let b = parse_url(base)?;
    let mut origin = format!("{}://", b.scheme);
    if let Some(userinfo) = b.userinfo {
        origin.push_str(userinfo);
        origin.push('@');
    }
    origin.push_str(b.host);
    if let Some(port) = b.port {
        origin.push(':');
        origin.push_str(&port.to_string());
    }

    let resolved = if let Some(rest) = reference.strip_prefix("//") {
        format!("{}://{rest}", b.scheme)
    } else if reference.starts_with('/') {
        format!("{origin}{reference}")
    } else if reference.starts_with('?') {
        format!("{origin}{}{reference}", b.path)
    } else if reference.starts_with('#') || reference.is_empty() {
        let mut s = format!("{origin}{}", b.path);
        if let Some(q) = b.query {
            s.push('?');
            s.push_str(q);
        }
        s.push_str(reference);
        s
    } else {
        let dir = match b.path.rfind('/') {
            Some(i) => &b.path[..=i],
            None => "/",
        };
        let mut segments: Vec<&str> = Vec::new();
        let joined = format!("{dir}{reference}");
        let (path, tail) = match joined.find(['?', '#']) {
            Some(i) => (&joined[..i], &joined[i..]),
            None => (joined.as_str(), ""),
        };
        let trailing = path.ends_with('/') || path.ends_with("/.") || path.ends_with("/..");
        for seg in path.split('/') {
            match seg {
                "" | "." => {}
                ".." => {
                    segments.pop();
                }
                s => segments.push(s),
            }
        }
        let mut s = origin;
        s.push('/');
        s.push_str(&segments.join("/"));
        if trailing && !segments.is_empty() {
            s.push('/');
        }
        s.push_str(tail);
        s
    };
    parse_url(&resolved)?;
    Ok(resolved)
}
