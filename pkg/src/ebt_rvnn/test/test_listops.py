import random

import pytest
import torch

from ebt_rvnn.core.cells import GatedRecursiveCell
from ebt_rvnn.core.parent_attention import record_tree
from ebt_rvnn.data.listops import (
    VOCAB,
    VOCAB_SIZE,
    GenConfig,
    ListOpsSample,
    detokenize,
    evaluate,
    generate_dataset,
    generate_sample,
    gold_trace,
    parse,
    tokenize,
)
from ebt_rvnn.errors import ConfigError, ParseError, VocabError


def stack_machine(tokens):
    """Postfix-free evaluation with an explicit operand stack"""
    stack = []
    for token in tokens:
        if token == "]":
            args = []
            while not isinstance(stack[-1], str):
                args.append(stack.pop())
            op = stack.pop()
            args.reverse()
            if op == "[MAX":
                stack.append(max(args))
            elif op == "[MIN":
                stack.append(min(args))
            elif op == "[MED":
                stack.append(sorted(args)[(len(args) - 1) // 2])
            else:
                stack.append(sum(args) % 10)
        elif token.startswith("["):
            stack.append(token)
        else:
            stack.append(int(token))
    assert len(stack) == 1
    return stack[0]


def replay(trace, n):
    """Replay on span lists; returns the number of nodes left"""
    nodes = [[i] for i in range(n)]
    for j in trace:
        assert 0 <= j < len(nodes) - 1
        nodes[j:j + 2] = [nodes[j] + nodes[j + 1]]
    return len(nodes)


@pytest.mark.parametrize("text, label", [
    ("[MAX 3 7 ]", 7),
    ("[SM 4 9 ]", 3),
    ("[MIN [MAX 1 2 ] 0 ]", 0),
    ("[MED 5 1 9 2 ]", 2),
    ("[MED 4 8 6 ]", 6),
])
def test_evaluate_examples(text, label):
    assert evaluate(parse(text.split())) == label


def test_vocabulary():
    assert VOCAB_SIZE == 15
    assert len(set(VOCAB)) == 15
    assert detokenize(tokenize(["[SM", "3", "]"])) == ["[SM", "3", "]"]
    with pytest.raises(VocabError):
        tokenize(["FOO"])
    with pytest.raises(VocabError):
        detokenize([15])


@pytest.mark.parametrize("text", ["[MAX 3 7", "3 7 ]", "[MAX ]", "[MAX 3 ] 4", "[MAX 3 X ]"])
def test_malformed_expressions(text):
    with pytest.raises(ParseError):
        parse(text.split())


def test_gold_trace_examples():
    assert gold_trace(ListOpsSample("[MAX 3 7 ]".split(), 7)) == [0, 0, 0]
    assert gold_trace(ListOpsSample("[MIN [MAX 1 2 ] 0 ]".split(), 0)) == [1, 1, 1, 0, 0, 0]


def test_inner_scope_is_reduced_before_the_outer_merge():
    tokens = "[MIN [MAX 1 2 ] 0 ]".split()
    nodes = [[i] for i in range(len(tokens))]
    for j in gold_trace(ListOpsSample(tokens, 0)):
        merged = nodes[j] + nodes[j + 1]
        if 0 in merged and 1 in merged:
            # the first merge joining MIN with the inner scope takes it whole
            assert merged == [0, 1, 2, 3, 4]
            break
        nodes[j:j + 2] = [merged]
    else:
        pytest.fail("the operator never absorbed its nested argument")


def test_generated_samples_agree_with_the_stack_machine():
    rng = random.Random(7)
    cfg = GenConfig(max_depth=4, max_args=3, max_length=50)
    for _ in range(1000):
        sample = generate_sample(cfg, rng)
        assert sample.label == stack_machine(sample.tokens)
        assert 0 <= sample.label <= 9


def test_generated_samples_respect_bounds_and_replay():
    rng = random.Random(3)
    cfg = GenConfig(max_depth=3, max_args=4, max_length=40, min_length=10)
    for _ in range(300):
        sample = generate_sample(cfg, rng)
        assert 10 <= len(sample) <= 40
        expr = parse(sample.tokens)
        assert expr.depth <= 3
        assert expr.max_args <= 4
        assert len(sample.gold_trace) == len(sample) - 1
        assert replay(sample.gold_trace, len(sample)) == 1


def test_gold_trace_replays_into_a_full_tree_record():
    rng = random.Random(0)
    sample = generate_sample(GenConfig(max_length=20), rng)
    cell = GatedRecursiveCell(4, 8, torch.Generator().manual_seed(0))
    record = record_tree(sample.gold_trace, torch.randn(len(sample), 4), cell)
    assert record.n_nonterminals == len(sample) - 1


def test_generation_is_deterministic():
    cfg = GenConfig(seed=11)
    first = generate_dataset(cfg, 20)
    second = generate_dataset(cfg, 20)
    assert [s.tokens for s in first] == [s.tokens for s in second]


def test_generalization_splits_come_from_config_changes():
    rng = random.Random(5)
    wide = GenConfig(max_depth=2, max_args=5, max_length=100)
    assert any(parse(generate_sample(wide, rng).tokens).max_args == 5 for _ in range(200))

    long = GenConfig(max_depth=8, max_args=3, max_length=100, min_length=50, branch_prob=0.5)
    for _ in range(5):
        assert 50 <= len(generate_sample(long, rng)) <= 100


@pytest.mark.parametrize("cfg", [
    GenConfig(max_length=3),
    GenConfig(max_args=1),
    GenConfig(min_length=60, max_length=50),
    GenConfig(value_high=12),
])
def test_invalid_configs(cfg):
    with pytest.raises(ConfigError):
        generate_sample(cfg, random.Random(0))


def test_unreachable_length_bounds():
    cfg = GenConfig(max_depth=1, max_args=2, max_length=30, min_length=20)
    with pytest.raises(ConfigError):
        generate_sample(cfg, random.Random(0))
