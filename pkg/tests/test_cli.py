import json

from commkex.cli import main
from commkex.gf import Rng
from commkex.kex import (
    derive_shared,
    keygen,
    params_from_json,
    private_key_from_json,
    public_key_from_json,
)
from commkex.attacks import DirectoryEntry, KeyDirectory, directory_to_obj
from commkex.wire import Transcript


def run(args):
    return main(args)


def gen_pipeline(tmp_path, seed_params=42, seed_a=1, seed_b=2, q=101, k=2, d=2, degree=3):
    params_path = tmp_path / "params.json"
    assert (
        run(
            [
                "gen-params",
                "--q",
                str(q),
                "--k",
                str(k),
                "--d",
                str(d),
                "--degree",
                str(degree),
                "--seed",
                str(seed_params),
                "-o",
                str(params_path),
            ]
        )
        == 0
    )
    paths = {"params": params_path}
    for name, seed in (("alice", seed_a), ("bob", seed_b)):
        key = tmp_path / f"{name}.key.json"
        pub = tmp_path / f"{name}.pub.json"
        assert (
            run(
                [
                    "keygen",
                    "--params",
                    str(params_path),
                    "--seed",
                    str(seed),
                    "-o",
                    str(key),
                    "--pub",
                    str(pub),
                ]
            )
            == 0
        )
        paths[f"{name}_key"] = key
        paths[f"{name}_pub"] = pub
    return paths


def test_gen_params_composite_modulus_exits_3(tmp_path):
    code = run(
        ["gen-params", "--q", "6", "--k", "1", "--d", "2", "--degree", "1", "-o", str(tmp_path / "p.json")]
    )
    assert code == 3


def test_usage_error_exits_2(tmp_path, capsys):
    assert run([]) == 2
    assert run(["gen-params"]) == 2
    assert run(["no-such-command"]) == 2
    capsys.readouterr()


def test_full_pipeline_agreement_and_passive_attack(tmp_path, capsys):
    paths = gen_pipeline(tmp_path)
    shared_a = tmp_path / "shared_a.bin"
    shared_b = tmp_path / "shared_b.bin"
    assert (
        run(
            [
                "derive",
                "--params",
                str(paths["params"]),
                "--key",
                str(paths["alice_key"]),
                "--peer-pub",
                str(paths["bob_pub"]),
                "-o",
                str(shared_a),
            ]
        )
        == 0
    )
    assert (
        run(
            [
                "derive",
                "--params",
                str(paths["params"]),
                "--key",
                str(paths["bob_key"]),
                "--peer-pub",
                str(paths["alice_pub"]),
                "-o",
                str(shared_b),
            ]
        )
        == 0
    )
    assert shared_a.read_bytes() == shared_b.read_bytes()

    recovered = tmp_path / "recovered.bin"
    assert (
        run(
            [
                "attack",
                "passive",
                "--params",
                str(paths["params"]),
                "--pub-a",
                str(paths["alice_pub"]),
                "--pub-b",
                str(paths["bob_pub"]),
                "-o",
                str(recovered),
            ]
        )
        == 0
    )
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["verified"] is True
    assert recovered.read_bytes() == shared_a.read_bytes()


def test_pipeline_reproducible_byte_for_byte(tmp_path):
    (tmp_path / "one").mkdir()
    (tmp_path / "two").mkdir()
    first = gen_pipeline(tmp_path / "one")
    second = gen_pipeline(tmp_path / "two")
    for name in ("params", "alice_key", "alice_pub", "bob_key", "bob_pub"):
        assert first[name].read_bytes() == second[name].read_bytes()


def test_attack_recover_key_cli(tmp_path, capsys):
    paths = gen_pipeline(tmp_path)
    params = params_from_json(paths["params"].read_text())
    # build a spanning directory file from fresh seeded keys
    rng = Rng(1000)
    entries = []
    directory = KeyDirectory(params, entries)
    while directory.public_rank() < params.m:
        sk, pk = keygen(params, rng)
        entries.append(DirectoryEntry(pk, sk))
    dir_path = tmp_path / "dir.json"
    dir_path.write_text(json.dumps(directory_to_obj(directory)))

    for mode in ("full", "structured"):
        code = run(
            [
                "attack",
                "recover-key",
                "--params",
                str(paths["params"]),
                "--dir",
                str(dir_path),
                "--target-pub",
                str(paths["alice_pub"]),
                "--mode",
                mode,
            ]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert report["verified"] is True

    # a rank-deficient directory fails with exit code 4 in full mode
    thin = KeyDirectory(params, entries[:1])
    thin_path = tmp_path / "thin.json"
    thin_path.write_text(json.dumps(directory_to_obj(thin)))
    code = run(
        [
            "attack",
            "recover-key",
            "--params",
            str(paths["params"]),
            "--dir",
            str(thin_path),
            "--target-pub",
            str(paths["alice_pub"]),
            "--mode",
            "full",
        ]
    )
    assert code == 4
    capsys.readouterr()


def test_attack_shared_cli(tmp_path, capsys):
    paths = gen_pipeline(tmp_path)
    params = params_from_json(paths["params"].read_text())
    rng = Rng(2000)
    entries = []
    directory = KeyDirectory(params, entries)
    while directory.public_rank() < params.m:
        sk, pk = keygen(params, rng)
        entries.append(DirectoryEntry(pk, sk))
    dir_path = tmp_path / "dir.json"
    dir_path.write_text(json.dumps(directory_to_obj(directory)))

    out = tmp_path / "shared.bin"
    code = run(
        [
            "attack",
            "shared",
            "--params",
            str(paths["params"]),
            "--dir",
            str(dir_path),
            "--victim-pub",
            str(paths["alice_pub"]),
            "--counterpart-pub",
            str(paths["bob_pub"]),
            "-o",
            str(out),
        ]
    )
    assert code == 0
    capsys.readouterr()
    sk_a = private_key_from_json(paths["alice_key"].read_text(), params.q)
    pk_b = public_key_from_json(paths["bob_pub"].read_text(), params.q)
    honest = derive_shared(params, sk_a, pk_b)
    assert out.read_bytes() == honest.to_bytes()


def test_bench_cli(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert (
        run(
            [
                "bench",
                "--q",
                "2147483647",
                "--k",
                "8",
                "--d",
                "2",
                "--degree",
                "3",
                "--seed",
                "7",
                "-o",
                str(report_path),
            ]
        )
        == 0
    )
    capsys.readouterr()
    report = json.loads(report_path.read_text())
    by_system = {e["system"]: e for e in report["entries"]}
    m = 16
    assert by_system["commutant-kex"]["muls"] == m * m
    assert by_system["commutant-kex"]["adds"] == m * (m - 1)
    assert by_system["commutant-kex"]["m_or_p_bits"] == 512
    assert by_system["dh"]["m_or_p_bits"] == 512
    assert by_system["commutant-kex"]["muls"] < by_system["dh"]["muls"]
    assert report["mul_ratio"] > 1
    # counts (not wall time) reproduce under the same seed
    report_path2 = tmp_path / "report2.json"
    run(
        [
            "bench",
            "--q",
            "2147483647",
            "--k",
            "8",
            "--d",
            "2",
            "--degree",
            "3",
            "--seed",
            "7",
            "-o",
            str(report_path2),
        ]
    )
    capsys.readouterr()
    report2 = json.loads(report_path2.read_text())
    assert [e["muls"] for e in report2["entries"]] == [
        e["muls"] for e in report["entries"]
    ]


def test_missing_file_exits_3(tmp_path, capsys):
    code = run(
        [
            "derive",
            "--params",
            str(tmp_path / "nope.json"),
            "--key",
            str(tmp_path / "nope2.json"),
            "--peer-pub",
            str(tmp_path / "nope3.json"),
            "-o",
            str(tmp_path / "out.bin"),
        ]
    )
    assert code == 3
    capsys.readouterr()


def test_truncated_params_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"q": "101", "k":')
    code = run(
        [
            "keygen",
            "--params",
            str(bad),
            "-o",
            str(tmp_path / "k.json"),
            "--pub",
            str(tmp_path / "p.json"),
        ]
    )
    assert code == 3
    capsys.readouterr()


def test_demo_roundtrip_and_sniff(tmp_path, capsys):
    paths = gen_pipeline(tmp_path, q=2147483647)
    params = params_from_json(paths["params"].read_text())
    # run a real listener in-process on an ephemeral port
    from commkex.wire import Listener

    listener = Listener(params=None, seed=31337, max_sessions=1)
    host, port = listener.start()
    transcript_path = tmp_path / "t.json"
    shared_path = tmp_path / "s.bin"
    try:
        code = run(
            [
                "demo",
                "connect",
                "--addr",
                f"{host}:{port}",
                "--params",
                str(paths["params"]),
                "--key",
                str(paths["alice_key"]),
                "--transcript",
                str(transcript_path),
                "-o",
                str(shared_path),
            ]
        )
        assert code == 0
        listener.wait(1)
    finally:
        listener.stop()
    capsys.readouterr()

    sniffed = tmp_path / "sniffed.bin"
    code = run(["demo", "sniff", "--transcript", str(transcript_path), "-o", str(sniffed)])
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert code == 0
    assert out["verdict"] is True
    assert sniffed.read_bytes() == shared_path.read_bytes()


def test_demo_connect_refused_exits_5(tmp_path, capsys):
    paths = gen_pipeline(tmp_path)
    code = run(
        [
            "demo",
            "connect",
            "--addr",
            "127.0.0.1:1",  # nothing listens there
            "--params",
            str(paths["params"]),
            "--key",
            str(paths["alice_key"]),
        ]
    )
    assert code == 5
    capsys.readouterr()


def test_demo_sniff_incomplete_exits_3(tmp_path, capsys):
    t = Transcript([])
    p = tmp_path / "t.json"
    p.write_text(t.to_json())
    assert run(["demo", "sniff", "--transcript", str(p)]) == 3
    capsys.readouterr()


def test_bad_address_exits_3(tmp_path, capsys):
    paths = gen_pipeline(tmp_path)
    code = run(
        [
            "demo",
            "connect",
            "--addr",
            "localhost",
            "--params",
            str(paths["params"]),
        ]
    )
    assert code == 3
    capsys.readouterr()
