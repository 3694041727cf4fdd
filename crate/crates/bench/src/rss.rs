// SPDX-License-Identifier: Apache-2.0

use anyhow::{bail, Context, Result};

/// Resident set size of process `pid`, in bytes.
#[cfg(target_os = "linux")]
pub fn sample_rss(pid: u32) -> Result<u64> {
    let path = format!("/proc/{pid}/statm");
    let statm =
        std::fs::read_to_string(&path).with_context(|| format!("process {pid} not found"))?;
    let resident: u64 = statm
        .split_whitespace()
        .nth(1)
        .context("malformed statm")?
        .parse()?;
    // SAFETY: sysconf has no preconditions.
    let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    if page <= 0 {
        bail!("page size unavailable");
    }
    Ok(resident * page as u64)
}

#[cfg(not(target_os = "linux"))]
pub fn sample_rss(pid: u32) -> Result<u64> {
    bail!("resident memory sampling is only implemented for Linux (pid {pid})")
}
