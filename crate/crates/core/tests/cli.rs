use std::path::Path;
use std::process::{Command, Output};

use fxprobe::audio::{read_wav, synth_signal, write_wav, Encoding, SignalKind, WavSpec};
use fxprobe::embed::load_embeddings;

fn fxprobe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fxprobe")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn sine(dir: &Path) {
    let buf = synth_signal(SignalKind::Sine { freq: 440.0 }, 0.3, 22050).unwrap();
    write_wav(&buf, &WavSpec::for_buffer(&buf, Encoding::Float32), dir.join("in.wav")).unwrap();
}

#[test]
fn render_effect_and_chain() {
    let dir = tempfile::tempdir().unwrap();
    sine(dir.path());
    let o = fxprobe(&["render", "--in", "in.wav", "--fx", "distortion", "--level", "7", "--out", "d.wav"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = fxprobe(&["render", "--in", "in.wav", "--chain", "pink_floyd", "--out", "p.wav"], dir.path());
    assert_eq!(code(&o), 0);
    let clean = read_wav(dir.path().join("in.wav")).unwrap();
    let d = read_wav(dir.path().join("d.wav")).unwrap();
    assert_eq!(d.frames(), clean.frames());
    assert!(d.rms() > clean.rms());
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    sine(dir.path());
    let bad_level = fxprobe(&["render", "--in", "in.wav", "--fx", "eq", "--level", "11", "--out", "x.wav"], dir.path());
    assert_eq!(code(&bad_level), 2);
    let bad_fx = fxprobe(&["render", "--in", "in.wav", "--fx", "flanger", "--level", "1", "--out", "x.wav"], dir.path());
    assert_eq!(code(&bad_fx), 2);
    std::fs::write(dir.path().join("bad.toml"), "seed = 1\nbogus = true\n").unwrap();
    assert_eq!(code(&fxprobe(&["--config", "bad.toml", "exp1"], dir.path())), 2);
    assert_eq!(code(&fxprobe(&["exp1"], dir.path())), 2);
    assert_eq!(code(&fxprobe(&["frobnicate"], dir.path())), 2);
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = fxprobe(&["render", "--in", "missing.wav", "--fx", "eq", "--level", "1", "--out", "x.wav"], dir.path());
    assert_eq!(code(&o), 3);
    assert_eq!(code(&fxprobe(&["exp3", "--manifest", "nope.csv"], dir.path())), 3);
}

#[test]
fn fixture_embed_train_eval() {
    let dir = tempfile::tempdir().unwrap();
    let fx = |args: &[&str]| {
        let o = fxprobe(args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    fx(&["fixture", "--kind", "four_class", "--out", "fx", "--tracks", "16", "--duration", "0.5"]);
    fx(&["embed", "--manifest", "fx/manifest.csv", "--out", "emb", "--conditions", "clean,fx:eq:*"]);
    let set = load_embeddings(dir.path().join("emb/builtin.fxemb")).unwrap();
    assert_eq!(set.len(), 16 * 11);
    fx(&["--seed", "7", "train", "--manifest", "fx/manifest.csv", "--out", "run"]);
    let table = fx(&["--seed", "7", "eval", "--manifest", "fx/manifest.csv", "--out", "run", "--condition", "fx:eq:10"]);
    assert!(table.starts_with("metric,value\naccuracy,"), "{table}");
}
