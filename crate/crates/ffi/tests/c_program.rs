//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler is on the PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "diachron.h"

int main(void) {
    const char *tokens[] = {"w1", "w2", "w3"};
    const char *labels[] = {"A", "A", "B", "C", "B", "D"};
    DiachronTrace *trace = NULL;
    if (diachron_trace_new("e1", DIACHRON_TASK_TAGGING, tokens, 3, labels, &trace) != DIACHRON_STATUS_OK) {
        fprintf(stderr, "%s\n", diachron_last_error());
        return 1;
    }
    double eo = -1.0;
    uint64_t num = 0, den = 0;
    if (diachron_edit_overhead(trace, 0, &eo, &num, &den) != DIACHRON_STATUS_OK) return 2;
    double ct = -1.0;
    if (diachron_correction_time(trace, &ct, NULL, NULL) != DIACHRON_STATUS_OK) return 3;
    printf("eo=%llu/%llu ct=%.6f\n", (unsigned long long)num, (unsigned long long)den, ct);

    DiachronTrace *bad = NULL;
    if (diachron_trace_from_json("not json", &bad) != DIACHRON_STATUS_PARSE || bad != NULL) return 4;
    if (strlen(diachron_last_error()) == 0) return 5;

    diachron_trace_free(trace);
    return 0;
}
"#;

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("libdiachron_ffi.a"), deps.parent()?.join("libdiachron_ffi.a")].into_iter().find(|p| p.exists())
}

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), static_lib()) else {
        eprintln!("skipping: no C compiler or static library");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("main.c");
    let binary = dir.path().join("main");
    std::fs::write(&source, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");

    let build = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&binary)
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));

    let run = Command::new(&binary).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "eo=1/4 ct=0.666667\n");
}
