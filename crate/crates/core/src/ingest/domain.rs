//! Host and registrable-domain helpers backed by a compiled-in public
//! suffix list.

use std::net::IpAddr;

/// Lowercase host of an absolute URL, without a trailing dot.
pub fn url_host(raw: &str) -> Option<String> {
    let u = url::Url::parse(raw.trim()).ok()?;
    let host = u.host_str()?.trim_end_matches('.').to_ascii_lowercase();
    (!host.is_empty()).then_some(host)
}

fn is_ip(host: &str) -> bool {
    host.trim_start_matches('[').trim_end_matches(']').parse::<IpAddr>().is_ok()
}

/// Registrable domain (eTLD+1) of a host. IP addresses, single-label hosts
/// and bare suffixes map to themselves.
pub fn registrable_domain(host: &str) -> String {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if is_ip(&host) {
        return host;
    }
    match psl::domain_str(&host) {
        Some(d) => d.to_string(),
        None => host,
    }
}

/// Public suffix of a host (`org`, `co.uk`). `None` for IP addresses and
/// empty hosts.
pub fn public_suffix(host: &str) -> Option<String> {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if host.is_empty() || is_ip(&host) {
        return None;
    }
    psl::suffix_str(&host).map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registrable_domains() {
        assert_eq!(registrable_domain("news.bbc.co.uk"), "bbc.co.uk");
        assert_eq!(registrable_domain("WWW.Example.ORG."), "example.org");
        assert_eq!(registrable_domain("127.0.0.1"), "127.0.0.1");
        assert_eq!(registrable_domain("localhost"), "localhost");
    }

    #[test]
    fn suffixes() {
        assert_eq!(public_suffix("news.bbc.co.uk").as_deref(), Some("co.uk"));
        assert_eq!(public_suffix("example.org").as_deref(), Some("org"));
        assert_eq!(public_suffix("10.0.0.1"), None);
    }

    #[test]
    fn hosts() {
        assert_eq!(url_host("https://News.BBC.co.uk/x").as_deref(), Some("news.bbc.co.uk"));
        assert_eq!(url_host("mailto:a@b.c"), None);
    }
}
