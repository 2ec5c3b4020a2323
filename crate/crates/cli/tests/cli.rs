use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lexmask(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lexmask"));
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars_os() {
        if k.to_string_lossy().starts_with("LEXMASK_") {
            cmd.env_remove(k);
        }
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lexmask(dir, args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json_lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const CHARS: &str = "我今天很难过心情不好绝望失眠";

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"].join("\n");
    for c in CHARS.chars() {
        vocab.push('\n');
        vocab.push(c);
    }
    fs::write(dir.path().join("vocab.txt"), vocab + "\n").unwrap();
    fs::write(dir.path().join("dict.txt"), "今天\n难过\n心情\n不好\n").unwrap();
    fs::write(dir.path().join("lexicon.tsv"), "绝望\t1\t1\n失眠\t0.9\t0\n").unwrap();
    dir
}

/// 16 posts of 16 characters each: 256 tokens.
fn write_corpus(dir: &Path) {
    let text: String = CHARS.chars().chain("我很".chars()).collect();
    assert_eq!(text.chars().count(), 16);
    let lines: String = (0..16)
        .map(|i| format!("{{\"source\":\"s{}\",\"user\":\"u{i}\",\"text\":\"{text}\"}}\n", i % 2))
        .collect();
    fs::write(dir.join("corpus.jsonl"), lines).unwrap();
}

#[test]
fn mask_256_token_corpus_gives_two_examples_and_manifest() {
    let dir = fixture();
    write_corpus(dir.path());
    ok(
        dir.path(),
        &[
            "mask", "--input", "corpus.jsonl", "--output", "masked.jsonl", "--vocab", "vocab.txt", "--dict",
            "dict.txt", "--lexicon", "lexicon.tsv", "--seed", "3",
        ],
    );
    let records = json_lines(&dir.path().join("masked.jsonl"));
    assert_eq!(records.len(), 2);
    for r in &records {
        assert_eq!(r["input_ids"].as_array().unwrap().len(), 128);
        let labels = r["labels"].as_array().unwrap();
        let masked = labels.iter().filter(|l| l.as_i64() != Some(-100)).count();
        assert!(masked >= 26);
        // Every post contains both lexicon words.
        assert_eq!(r["lexicon_groups"].as_array().unwrap().len(), 16);
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("masked.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "mask");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["counts"]["chunks"], 2);
    assert_eq!(manifest["counts"]["documents"], 16);
    assert_eq!(manifest["counts"]["dropped_tokens"], 0);
    assert_eq!(manifest["config"]["policy"]["budget"], 0.2);
    assert_eq!(manifest["config"]["chunk_len"], 128);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["output"]["sha256"].as_str().unwrap().len(), 64);
    assert!(!fs::read_to_string(dir.path().join("masked.jsonl.manifest.json")).unwrap().contains("time"));
}

#[test]
fn jsonl_and_binary_chunks_mask_identically() {
    let dir = fixture();
    write_corpus(dir.path());
    let chunk = |fmt: &str, out: &str| {
        ok(
            dir.path(),
            &[
                "chunk", "--input", "corpus.jsonl", "--output", out, "--vocab", "vocab.txt", "--dict", "dict.txt",
                "--lexicon", "lexicon.tsv", "--chunk-len", "40", "--format", fmt,
            ],
        )
    };
    chunk("jsonl", "c.jsonl");
    chunk("binary", "c.bin");
    let chunks = json_lines(&dir.path().join("c.jsonl"));
    assert_eq!(chunks.len(), 6);
    assert_eq!(chunks[1]["origin"]["chunk_id"], 1);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["counts"]["dropped_tokens"], 16);
    for input in ["c.jsonl", "c.bin"] {
        let out = format!("{input}.masked");
        ok(dir.path(), &["mask", "--input", input, "--output", &out, "--vocab", "vocab.txt"]);
    }
    assert_eq!(
        fs::read(dir.path().join("c.jsonl.masked")).unwrap(),
        fs::read(dir.path().join("c.bin.masked")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = fixture();
    let code = |args: &[&str]| lexmask(dir.path(), args, &[]).status.code().unwrap();
    assert_eq!(code(&["clean", "--input", "missing.jsonl", "--output", "o"]), 2);
    assert_eq!(code(&["mask", "--input", "vocab.txt", "--output", "o", "--vocab", "nope.txt"]), 2);

    fs::write(dir.path().join("bad.jsonl"), "{\"source\":\"a\",\"text\":\"ok\"}\n{\"source\":\n").unwrap();
    let out = lexmask(dir.path(), &["clean", "--input", "bad.jsonl", "--output", "o"], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.jsonl:2"));

    fs::write(dir.path().join("latin1.txt"), b"ok\n\xff\xfe\n").unwrap();
    assert_eq!(code(&["clean", "--input", "latin1.txt", "--source", "x", "--output", "o"]), 3);

    fs::write(dir.path().join("lex_bad.tsv"), "崩溃\t1.5\t0\n").unwrap();
    fs::write(dir.path().join("c.txt"), "今天很难过\n").unwrap();
    assert_eq!(code(&["segment", "--input", "c.txt", "--output", "o", "--lexicon", "lex_bad.tsv"]), 4);
    assert_eq!(code(&["split", "--n", "3", "--folds", "5"]), 4);
    assert_eq!(code(&["mask", "--input", "c.txt", "--output", "o", "--vocab", "vocab.txt", "--policy", "0.5:0.5:0.5"]), 4);
    assert_eq!(code(&["mask", "--no-such-flag"]), 4);
    assert_eq!(code(&["clean", "--input", "c.txt", "--source", "x"]), 4);
}

#[test]
fn flag_beats_env_beats_config() {
    let dir = fixture();
    write_corpus(dir.path());
    fs::write(
        dir.path().join("run.toml"),
        "vocab = \"vocab.txt\"\ndict = [\"dict.txt\"]\nlexicon = \"lexicon.tsv\"\nseed = 1\n",
    )
    .unwrap();
    let run = |out: &str, extra: &[&str], env: &[(&str, &str)]| {
        let mut args = vec!["--config", "run.toml", "mask", "--input", "corpus.jsonl", "--output", out];
        args.extend_from_slice(extra);
        let o = lexmask(dir.path(), &args, env);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{out}.manifest.json"))).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(run("a", &[], &[]), 1);
    assert_eq!(run("b", &[], &[("LEXMASK_SEED", "2")]), 2);
    assert_eq!(run("c", &["--seed", "3"], &[("LEXMASK_SEED", "2")]), 3);
    assert_ne!(fs::read(dir.path().join("a")).unwrap(), fs::read(dir.path().join("b")).unwrap());

    fs::write(dir.path().join("typo.toml"), "sed = 1\n").unwrap();
    let o = lexmask(dir.path(), &["--config", "typo.toml", "split", "--n", "10"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn clean_then_stats() {
    let dir = fixture();
    fs::write(
        dir.path().join("raw.jsonl"),
        concat!(
            "{\"source\":\"A\",\"user\":\"1\",\"text\":\"看 http://t.cn/abc 心情不好\"}\n",
            "{\"source\":\"A\",\"user\":\"1\",\"text\":\"@小明 #抑郁#难受\"}\n",
            "{\"source\":\"B\",\"user\":\"2\",\"text\":\"好\"}\n",
        ),
    )
    .unwrap();
    ok(dir.path(), &["clean", "--input", "raw.jsonl", "--output", "clean.jsonl"]);
    let kept = json_lines(&dir.path().join("clean.jsonl"));
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0]["text"], "看 心情不好");
    ok(dir.path(), &["clean", "--input", "raw.jsonl", "--output", "clean2.jsonl", "--min-chars", "2"]);
    assert_eq!(json_lines(&dir.path().join("clean2.jsonl"))[1]["text"], "难受");

    let stats: Value = serde_json::from_str(&ok(dir.path(), &["stats", "--input", "raw.jsonl"])).unwrap();
    assert_eq!(stats["total_posts"], 3);
    assert_eq!(stats["total_users"], 2);
    assert_eq!(stats["per_source"]["A"]["users"], 1);
    assert_eq!(stats["kept_after_cleaning"], 1);
}

#[test]
fn segment_output_round_trips_into_chunk() {
    let dir = fixture();
    fs::write(dir.path().join("c.txt"), "今天心情不好绝望\n我很难过失眠\n").unwrap();
    ok(dir.path(), &["segment", "--input", "c.txt", "--source", "x", "--output", "seg.jsonl", "--dict", "dict.txt", "--lexicon", "lexicon.tsv"]);
    let seg = json_lines(&dir.path().join("seg.jsonl"));
    assert_eq!(seg[0]["spans"], serde_json::json!([[0, 2], [2, 2], [4, 2], [6, 2]]));
    assert_eq!(seg[0]["source"], "x");

    // Chunking stored spans must not need the dictionary again.
    ok(dir.path(), &["chunk", "--input", "seg.jsonl", "--output", "c1.jsonl", "--vocab", "vocab.txt", "--lexicon", "lexicon.tsv", "--chunk-len", "8"]);
    let chunks = json_lines(&dir.path().join("c1.jsonl"));
    assert_eq!(chunks.len(), 1);
    assert_eq!(chunks[0]["groups"], serde_json::json!([[0, 2], [2, 2], [4, 2], [6, 2]]));
    assert_eq!(chunks[0]["lexicon_groups"], serde_json::json!([3]));

    fs::write(dir.path().join("badspans.jsonl"), "{\"text\":\"今天\",\"spans\":[[0,1]]}\n").unwrap();
    let o = lexmask(dir.path(), &["chunk", "--input", "badspans.jsonl", "--output", "o", "--vocab", "vocab.txt"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn expand_lexicon_adds_associated_words() {
    let dir = fixture();
    let corpus = "我很绝望难过\n绝望难过失眠\n今天心情不好\n心情不好今天\n";
    fs::write(dir.path().join("c.txt"), corpus).unwrap();
    fs::write(dir.path().join("seeds.txt"), "绝望\n").unwrap();
    ok(
        dir.path(),
        &[
            "expand-lexicon", "--input", "c.txt", "--source", "x", "--seeds", "seeds.txt", "--dict", "dict.txt",
            "--output", "lex.tsv", "--cutoff", "0.5",
        ],
    );
    let tsv = fs::read_to_string(dir.path().join("lex.tsv")).unwrap();
    let words: Vec<&str> = tsv.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert!(words.contains(&"绝望") && words.contains(&"难过"));
    // The second component never touches a seed.
    assert!(!words.contains(&"心情") && !words.contains(&"今天"));

    fs::write(dir.path().join("absent.txt"), "崩溃\n").unwrap();
    let args = ["expand-lexicon", "--input", "c.txt", "--source", "x", "--seeds", "absent.txt", "--output", "o"];
    let o = lexmask(dir.path(), &args, &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("崩溃"));
    let mut skip = args.to_vec();
    skip.push("--skip-missing-seeds");
    ok(dir.path(), &skip);
}

#[test]
fn probe_eval_split_summary() {
    let dir = fixture();
    fs::write(dir.path().join("p.jsonl"), "{\"sentence\":\"经常责怪自己\",\"target\":\"责怪\"}\n").unwrap();
    ok(dir.path(), &["probe", "--input", "p.jsonl", "--output", "p.out"]);
    assert_eq!(json_lines(&dir.path().join("p.out"))[0]["masked"], "经常[MASK][MASK]自己");
    fs::write(dir.path().join("p2.jsonl"), "{\"sentence\":\"经常\",\"target\":\"责怪\"}\n").unwrap();
    assert_eq!(lexmask(dir.path(), &["probe", "--input", "p2.jsonl", "--output", "o"], &[]).status.code(), Some(4));

    fs::write(
        dir.path().join("preds.jsonl"),
        "{\"id\":1,\"gold\":\"0\",\"pred\":\"0\"}\n{\"id\":2,\"gold\":\"0\",\"pred\":\"1\"}\n{\"id\":3,\"gold\":\"1\",\"pred\":\"1\"}\n",
    )
    .unwrap();
    let r: Value = serde_json::from_str(&ok(dir.path(), &["eval", "--input", "preds.jsonl", "--averaging", "macro"])).unwrap();
    assert!((r["pooled"]["f1"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let r: Value = serde_json::from_str(&ok(dir.path(), &["eval", "--input", "preds.jsonl", "--averaging", "binary"])).unwrap();
    assert_eq!(r["pooled"]["precision"], 0.5);
    assert_eq!(r["pooled"]["recall"], 1.0);
    fs::write(dir.path().join("three.jsonl"), "{\"gold\":\"a\",\"pred\":\"b\"}\n{\"gold\":\"c\",\"pred\":\"c\"}\n").unwrap();
    assert_eq!(lexmask(dir.path(), &["eval", "--input", "three.jsonl", "--averaging", "binary"], &[]).status.code(), Some(4));
    assert_eq!(lexmask(dir.path(), &["eval", "--input", "three.jsonl", "--labels", "a,b"], &[]).status.code(), Some(4));

    let s: Value = serde_json::from_str(&ok(dir.path(), &["split", "--n", "11", "--seed", "4"])).unwrap();
    let mut sizes: Vec<usize> = s["folds"].as_array().unwrap().iter().map(|f| f.as_array().unwrap().len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [2, 2, 2, 2, 3]);
    assert_eq!(s, serde_json::from_str::<Value>(&ok(dir.path(), &["split", "--n", "11", "--seed", "4"])).unwrap());

    fs::write(dir.path().join("train.jsonl"), "{\"text\":\"今天心情不好\",\"labels\":[\"a\",\"b\"]}\n{\"text\":\"难过\",\"labels\":\"a\"}\n").unwrap();
    let d: Value = serde_json::from_str(&ok(dir.path(), &["summary", "--train", "train.jsonl", "--dict", "dict.txt"])).unwrap();
    assert_eq!(d["n_train"], 2);
    assert_eq!(d["classes"], 2);
    assert_eq!(d["avg_categories"], 1.5);
    assert_eq!(d["avg_words"], 2.0);
}
