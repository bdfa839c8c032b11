from __future__ import annotations

import pytest

from solsum.callgraph import build_reference_tree
from solsum.llmclient import (
    LlmRequest,
    MalformedResponse,
    MockBackend,
    RateLimited,
    RemoteChatBackend,
    TransportError,
    parse_prompt_sections,
    summarize,
)
from solsum.promptgen import ABLATION_ROWS, AblationMask, FULL_MASK, build_prompt, render_prompt
from solsum.semfacts import collect_facts

from wire import ScriptedServer


@pytest.fixture(scope="module")
def table7_prompts(table7_unit):
    ref = build_reference_tree(table7_unit)
    facts = collect_facts(table7_unit, ref, "DataController", "transferDataOwnership", 5)
    target = table7_unit.contracts[1].functions[0].body_text
    return {
        label: render_prompt(build_prompt(facts, target, [], mask))
        for label, mask in ABLATION_ROWS
    }


def test_mock_full_mask_names_callees(table7_prompts):
    resp = summarize(MockBackend(), LlmRequest(table7_prompts["ALL"]))
    assert "transferOwnership" in resp.summary
    assert resp.summary.startswith("transferDataOwnership")
    assert "_addr" in resp.summary


def test_mock_all_ablated_names_no_callees(table7_prompts):
    resp = summarize(MockBackend(), LlmRequest(table7_prompts["-ALL"]))
    assert resp.summary == "transferDataOwnership."
    assert "transferOwnership" not in resp.summary


def test_mock_deterministic(table7_prompts):
    req = LlmRequest(table7_prompts["ALL"])
    assert summarize(MockBackend(), req) == summarize(MockBackend(), req)


def test_mock_cfg_ablation_changes_output_iff_callees(table7_unit):
    ref = build_reference_tree(table7_unit)
    target_with = table7_unit.contracts[1].functions[0]
    facts_with = collect_facts(table7_unit, ref, "DataController",
                               "transferDataOwnership", 5)
    leaf = next(f for f in table7_unit.contracts[0].functions
                if f.name == "_transferOwnership")
    facts_leaf = collect_facts(table7_unit, ref, "Ownable", "_transferOwnership", 5)
    mock = MockBackend()
    for facts, fn, expect_change in ((facts_with, target_with, True),
                                     (facts_leaf, leaf, False)):
        full = render_prompt(build_prompt(facts, fn.body_text, [], FULL_MASK))
        nocfg = render_prompt(build_prompt(facts, fn.body_text, [],
                                           AblationMask(False, True, True)))
        a = summarize(mock, LlmRequest(full)).summary
        b = summarize(mock, LlmRequest(nocfg)).summary
        assert (a != b) == expect_change


def test_mock_constructor_and_fallback_naming():
    mock = MockBackend()
    ctor = "[TARGET]\nconstructor(uint256 x) { }\n\n[INSTRUCTION]\ngo"
    assert summarize(mock, LlmRequest(ctor)).summary.startswith("constructor")
    fb = "[TARGET]\nfallback() external { }\n\n[INSTRUCTION]\ngo"
    assert summarize(mock, LlmRequest(fb)).summary.startswith("fallback")


def test_parse_prompt_sections_roundtrip(table7_prompts):
    sections = parse_prompt_sections(table7_prompts["ALL"])
    assert set(sections) == {"ROLE", "CONTRACT", "IDENTIFIERS", "CALL_GRAPH",
                             "INNER_FUNCTIONS", "TARGET", "INSTRUCTION"}
    assert sections["TARGET"].startswith("function transferDataOwnership")


def test_empty_prompt_rejected():
    with pytest.raises(ValueError):
        summarize(MockBackend(), LlmRequest(""))


# -- remote backend ----------------------------------------------------------------

def _ok_body(content="A summary."):
    return {"choices": [{"message": {"content": content}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 3}}


def test_remote_happy_path():
    with ScriptedServer([(200, {}, _ok_body("  Transfers data ownership. "))]) as srv:
        backend = RemoteChatBackend(srv.url, "test-model", api_key="k")
        resp = summarize(backend, LlmRequest("hello", model_id="test-model",
                                             max_output_tokens=64, temperature=0.0))
        assert resp.summary == "Transfers data ownership."
        assert resp.token_usage == (10, 3)
        sent = srv.requests[0]["payload"]
        assert sent["model"] == "test-model"
        assert sent["messages"] == [{"role": "user", "content": "hello"}]
        assert sent["max_tokens"] == 64
        assert sent["temperature"] == 0.0
        assert srv.requests[0]["headers"]["Authorization"] == "Bearer k"


def test_remote_retries_on_server_error():
    with ScriptedServer([(500, {}, {}), (200, {}, _ok_body())]) as srv:
        backend = RemoteChatBackend(srv.url, "m", backoff=0.01)
        resp = summarize(backend, LlmRequest("x"))
        assert resp.summary == "A summary."
        assert len(srv.requests) == 2


def test_remote_transport_error_after_cap(caplog):
    with ScriptedServer([(500, {}, {})]) as srv:
        backend = RemoteChatBackend(srv.url, "m", max_retries=2, backoff=0.01)
        with caplog.at_level("INFO", logger="solsum.llmclient"):
            with pytest.raises(TransportError):
                summarize(backend, LlmRequest("x"))
        assert len(srv.requests) == 3  # attempts never exceed the cap
        retry_logs = [r for r in caplog.records if "retrying" in r.message]
        assert len(retry_logs) == 2


def test_remote_honors_retry_after():
    with ScriptedServer([
        (429, {"Retry-After": "0.01"}, {}),
        (200, {}, _ok_body()),
    ]) as srv:
        backend = RemoteChatBackend(srv.url, "m", backoff=5.0)
        resp = summarize(backend, LlmRequest("x"))
        assert resp.summary == "A summary."
        assert len(srv.requests) == 2


def test_remote_rate_limited_exhaustion():
    with ScriptedServer([(429, {"Retry-After": "0.01"}, {})]) as srv:
        backend = RemoteChatBackend(srv.url, "m", max_retries=1, backoff=0.01)
        with pytest.raises(RateLimited):
            summarize(backend, LlmRequest("x"))


def test_remote_malformed_response():
    with ScriptedServer([(200, {}, {"nope": True})]) as srv:
        backend = RemoteChatBackend(srv.url, "m")
        with pytest.raises(MalformedResponse):
            summarize(backend, LlmRequest("x"))


def test_remote_unreachable_endpoint():
    backend = RemoteChatBackend("http://127.0.0.1:1/", "m", max_retries=1, backoff=0.01)
    with pytest.raises(TransportError):
        summarize(backend, LlmRequest("x"))


def test_remote_attachment_flag_gated():
    with ScriptedServer([(200, {}, _ok_body()), (200, {}, _ok_body())]) as srv:
        gated_off = RemoteChatBackend(srv.url, "m")
        summarize(gated_off, LlmRequest("x", attachment="g.png"))
        assert "attachment_path" not in srv.requests[0]["payload"]
        gated_on = RemoteChatBackend(srv.url, "m", send_attachment=True)
        summarize(gated_on, LlmRequest("x", attachment="g.png"))
        assert srv.requests[1]["payload"]["attachment_path"] == "g.png"


def test_token_bucket_throttles_and_refills():
    import time
    from solsum.llmclient import _TokenBucket

    bucket = _TokenBucket(rate_per_sec=200.0)
    for _ in range(200):  # drain the initial capacity without blocking
        bucket.acquire()
    start = time.monotonic()
    bucket.acquire()
    assert time.monotonic() - start >= 0.003  # waited for a refill
