"""The localhost HTTP facade, end to end over a real socket."""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request

import pytest

from mitmlab.service import make_server


@pytest.fixture()
def base_url():
    server = make_server("127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def call(base: str, method: str, path: str, body: dict | None = None):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(base + path, data=data, method=method)
    if data is not None:
        request.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(request) as response:
            payload = response.read()
            return response.status, json.loads(payload) if payload else None
    except urllib.error.HTTPError as error:
        payload = error.read()
        return error.code, json.loads(payload) if payload else None


def make_session(base: str, scenario_id: int = 2, seed: int = 0) -> dict:
    status, doc = call(base, "POST", "/sessions", {"scenario_id": scenario_id, "seed": seed})
    assert status == 201
    return doc["session"]


def test_scenarios_listing(base_url) -> None:
    status, doc = call(base_url, "GET", "/scenarios")
    assert status == 200
    assert [s["id"] for s in doc["scenarios"]] == [1, 2, 3, 4, 5, 6]
    assert all("title" in s and "config" in s for s in doc["scenarios"])


def test_session_lifecycle(base_url) -> None:
    session = make_session(base_url)
    sid = session["session_id"]
    assert session["cursor"] == 0 and not session["finished"]

    events = []
    while True:
        status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
        if status == 409:
            break
        assert status == 200
        events.append(doc["event"])
    status, transcript = call(base_url, "GET", f"/sessions/{sid}/transcript")
    assert status == 200
    assert transcript["events"] == events
    assert transcript["outcome"] == "RejectedTampering"

    # the wire transcript is the same document a direct engine run produces
    from mitmlab.engine import run_scenario

    batch, _ = run_scenario(2, 0)
    assert transcript == batch.to_document()


def test_choice_changes_the_ending(base_url) -> None:
    session = make_session(base_url, scenario_id=2, seed=4)
    sid = session["session_id"]
    while True:
        status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
        assert status == 200
        if doc["session"]["pending_choice"]:
            break
    status, doc = call(
        base_url, "POST", f"/sessions/{sid}/choice", {"strategy": "modify_message_and_hash"}
    )
    assert status == 200
    assert doc["session"]["strategy_override"] == "modify_message_and_hash"
    while not doc["session"]["finished"]:
        status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
    assert doc["session"]["outcome"] == "ExecutedForged"


def test_choice_rejected_when_not_at_the_fork(base_url) -> None:
    session = make_session(base_url)
    sid = session["session_id"]
    status, doc = call(base_url, "POST", f"/sessions/{sid}/choice", {"strategy": "passive_read"})
    assert status == 409
    assert doc["error"] == "NotAtInterceptionPoint"


def test_bad_strategy_name_in_choice(base_url) -> None:
    session = make_session(base_url)
    sid = session["session_id"]
    while True:
        _, doc = call(base_url, "POST", f"/sessions/{sid}/step")
        if doc["session"]["pending_choice"]:
            break
    status, doc = call(base_url, "POST", f"/sessions/{sid}/choice", {"strategy": "nope"})
    assert status == 400
    assert doc["error"] == "UnknownStrategy"


def test_step_after_finish_conflicts(base_url) -> None:
    session = make_session(base_url, scenario_id=1)
    sid = session["session_id"]
    while True:
        status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
        if status != 200 or doc["session"]["finished"]:
            break
    status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
    assert status == 409
    assert doc["error"] == "SessionFinished"


def test_unknown_session_and_scenario(base_url) -> None:
    status, doc = call(base_url, "POST", "/sessions/feedc0ffee99/step")
    assert status == 404
    status, doc = call(base_url, "POST", "/sessions", {"scenario_id": 42, "seed": 0})
    assert status == 404
    assert doc["error"] == "UnknownScenario"


def test_session_creation_validates_types(base_url) -> None:
    for body in (
        {"scenario_id": "2"},
        {"scenario_id": 2, "seed": "x"},
        {"scenario_id": True},
        {},
        {"scenario_id": 2, "scenario": {"id": 7}},
    ):
        status, doc = call(base_url, "POST", "/sessions", body)
        assert status == 400, body


def test_session_from_inline_scenario_document(base_url) -> None:
    doc = {
        "id": 9,
        "title": "inline drill",
        "config": {
            "integrity_hash": True,
            "confidentiality_encryption": False,
            "ca_authentication": False,
        },
        "strategy": "modify_message_and_hash",
        "message_text": "Send $100 to Alice",
        "substitution": ["$100", "$1000"],
    }
    status, created = call(base_url, "POST", "/sessions", {"scenario": doc, "seed": 1})
    assert status == 201
    sid = created["session"]["session_id"]
    while True:
        status, stepped = call(base_url, "POST", f"/sessions/{sid}/step")
        if stepped["session"]["finished"]:
            break
    assert stepped["session"]["outcome"] == "ExecutedForged"

    status, bad = call(base_url, "POST", "/sessions", {"scenario": {"id": 9}})
    assert status == 400
    assert bad["error"] == "ParseError"


def test_malformed_body_is_a_400(base_url) -> None:
    request = urllib.request.Request(
        base_url + "/sessions", data=b"{nope", method="POST"
    )
    with pytest.raises(urllib.error.HTTPError) as info:
        urllib.request.urlopen(request)
    assert info.value.code == 400


def test_delete_session(base_url) -> None:
    sid = make_session(base_url)["session_id"]
    status, _ = call(base_url, "DELETE", f"/sessions/{sid}")
    assert status == 204
    status, _ = call(base_url, "GET", f"/sessions/{sid}")
    assert status == 404


def test_analysis_endpoint(base_url) -> None:
    body = {"config": "hash,enc,ca", "strategies": list(("modify_message", "impersonate_vs_ca")), "seed": 0}
    status, doc = call(base_url, "POST", "/analysis", body)
    assert status == 200
    assert doc["properties"]["authentication"]["verdict"] == "holds"

    status, doc = call(base_url, "POST", "/analysis", {"config": "ca", "strategies": ["passive_read"]})
    assert status == 400
    assert doc["error"] == "InvalidConfig"

    status, doc = call(base_url, "POST", "/analysis", {"config": "none", "strategies": []})
    assert status == 400
    assert doc["error"] == "EmptyStrategySet"


def test_analysis_accepts_config_dict_form(base_url) -> None:
    body = {
        "config": {"integrity_hash": True, "confidentiality_encryption": False, "ca_authentication": False},
        "strategies": ["modify_message"],
    }
    status, doc = call(base_url, "POST", "/analysis", body)
    assert status == 200
    assert doc["properties"]["integrity"]["verdict"] == "holds"


def test_twin_sessions_replay_identically_and_die_independently(base_url) -> None:
    first = make_session(base_url, scenario_id=5, seed=7)["session_id"]
    second = make_session(base_url, scenario_id=5, seed=7)["session_id"]
    assert first != second

    status, _ = call(base_url, "DELETE", f"/sessions/{first}")
    assert status == 204  # the twin keeps working after the sibling is gone

    while True:
        status, doc = call(base_url, "POST", f"/sessions/{second}/step")
        if doc["session"]["finished"]:
            break
    status, survivor = call(base_url, "GET", f"/sessions/{second}/transcript")
    assert status == 200

    third = make_session(base_url, scenario_id=5, seed=7)["session_id"]
    while True:
        status, doc = call(base_url, "POST", f"/sessions/{third}/step")
        if doc["session"]["finished"]:
            break
    _, replayed = call(base_url, "GET", f"/sessions/{third}/transcript")
    assert replayed == survivor


def test_parallel_sessions_do_not_interfere(base_url) -> None:
    ids = [make_session(base_url, scenario_id=sid)["session_id"] for sid in (1, 2, 3)]

    def drive(sid: str, out: dict) -> None:
        while True:
            status, doc = call(base_url, "POST", f"/sessions/{sid}/step")
            if status == 409:
                break
            if doc["session"]["finished"]:
                out[sid] = doc["session"]["outcome"]
                break

    results: dict = {}
    threads = [threading.Thread(target=drive, args=(sid, results)) for sid in ids]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert [results[sid] for sid in ids] == [
        "ExecutedForged",
        "RejectedTampering",
        "ExecutedForged",
    ]
