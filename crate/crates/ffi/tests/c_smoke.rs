use std::path::PathBuf;
use std::process::Command;

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libspinharm_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/spinharm.h"),
    )
    .unwrap();
    for f in [
        "sh_version",
        "sh_last_error_message",
        "sh_quat_from_vector",
        "sh_vector_from_quat",
        "sh_quat_multiply",
        "sh_project_so3",
        "sh_gibbs_compose",
        "sh_character",
        "sh_wigner_d",
        "sh_grid_new",
        "sh_grid_free",
        "sh_grid_info",
        "sh_gridfn_idempotent",
        "sh_gridfn_from_values",
        "sh_gridfn_free",
        "sh_convolve_nodes",
        "sh_poisson_evolve",
        "sh_evolution_len",
        "sh_evolution_snapshot",
        "sh_evolution_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f}");
    }
}
