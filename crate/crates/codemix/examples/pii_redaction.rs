//! Scan posts for phone numbers, emails, and account numbers, redact them
//! in place, and show the discard policy firing when residual digits remain
//! next to a redacted span.
//!
//! Run with: cargo run --example pii_redaction

use codemix::pii::{PiiScanner, RedactionResult};

fn main() {
    let scanner = PiiScanner::default();
    let posts = [
        "inbox mình qua mail@example.com nhé",
        "gọi mình theo số 0912 345 678 sau 6h",
        "chuyển vào tài khoản 123456789012 trước thứ hai",
        "không có gì nhạy cảm ở đây cả",
        "gọi 0987654x65432x1 nhé",
    ];
    for post in posts {
        match scanner.sanitize(post) {
            RedactionResult::Clean { .. } => println!("clean     | {post}"),
            RedactionResult::Redacted { text, n_findings } => {
                println!("redacted  | {text}   ({n_findings} finding(s))")
            }
            RedactionResult::Discarded { reason } => {
                println!("discarded | original withheld: {reason}")
            }
        }
    }
}
