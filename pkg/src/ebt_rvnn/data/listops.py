"""
ListOps expressions: vocabulary, generator, evaluator and gold merge traces

An expression is an operator token, two or more arguments (digits or nested
expressions) and a closing bracket::

    [MIN [MAX 1 2 ] 0 ]   -> 1

MED takes the lower middle element for an even number of arguments and SM is
the sum modulo 10.
"""

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from ..errors import ConfigError, ParseError, VocabError

OPERATORS = ("[MAX", "[MIN", "[MED", "[SM")
CLOSE = "]"
DIGITS = tuple(str(v) for v in range(10))
VOCAB = OPERATORS + (CLOSE,) + DIGITS
VOCAB_SIZE = len(VOCAB)
NUM_CLASSES = 10

_TOKEN_IDS = {token: i for i, token in enumerate(VOCAB)}

# minimal expression: operator, two digits, close bracket
_MIN_EXPRESSION_LENGTH = 4
MAX_TRIES = 10000


def tokenize(tokens: Sequence[str]) -> List[int]:
    try:
        return [_TOKEN_IDS[token] for token in tokens]
    except KeyError as e:
        raise VocabError(f"Unknown ListOps symbol {e.args[0]!r}") from None


def detokenize(ids: Sequence[int]) -> List[str]:
    out = []
    for i in ids:
        if not 0 <= int(i) < VOCAB_SIZE:
            raise VocabError(f"Token id {i} outside vocabulary of {VOCAB_SIZE}")
        out.append(VOCAB[int(i)])
    return out


@dataclass
class Expression:
    op: str
    args: List[Union[int, "Expression"]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return 1 + max((a.depth for a in self.args if isinstance(a, Expression)), default=0)

    @property
    def max_args(self) -> int:
        nested = (a.max_args for a in self.args if isinstance(a, Expression))
        return max([len(self.args), *nested])

    def tokens(self) -> List[str]:
        out = [self.op]
        for arg in self.args:
            out.extend(arg.tokens() if isinstance(arg, Expression) else [str(arg)])
        out.append(CLOSE)
        return out


@dataclass
class ListOpsSample:
    tokens: List[str]
    label: int
    gold_trace: Optional[List[int]] = None

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class GenConfig:
    """Bounds for one generated split"""
    max_depth: int = 4
    max_args: int = 3
    max_length: int = 50
    min_length: int = 1
    min_args: int = 2
    branch_prob: float = 0.35
    value_low: int = 0
    value_high: int = 9
    seed: int = 0

    def validate(self):
        if self.max_depth < 1 or self.max_length < 1 or self.min_length < 1:
            raise ConfigError("max_depth, max_length and min_length must be positive")
        if self.min_args < 2 or self.max_args < self.min_args:
            raise ConfigError(f"argument bounds [{self.min_args}, {self.max_args}] need 2 <= min_args <= max_args")
        if self.max_length < 2 + self.min_args:
            raise ConfigError(f"max_length={self.max_length} cannot hold a single operator "
                              f"with {self.min_args} arguments")
        if self.min_length > self.max_length:
            raise ConfigError(f"min_length={self.min_length} exceeds max_length={self.max_length}")
        if not 0 <= self.value_low <= self.value_high <= 9:
            raise ConfigError(f"value range [{self.value_low}, {self.value_high}] must lie within 0..9")
        if not 0.0 <= self.branch_prob <= 1.0:
            raise ConfigError("branch_prob must be in [0, 1]")


def evaluate(expr: Union[int, Expression]) -> int:
    if isinstance(expr, int):
        return expr
    values = [evaluate(a) for a in expr.args]
    if expr.op == "[MAX":
        return max(values)
    if expr.op == "[MIN":
        return min(values)
    if expr.op == "[MED":
        return sorted(values)[(len(values) - 1) // 2]
    if expr.op == "[SM":
        return sum(values) % 10
    raise ParseError(f"Unknown operator {expr.op!r}")


def parse(tokens: Sequence[str]) -> Expression:
    """Build the expression tree; malformed bracketing raises ParseError"""
    stack: List[Expression] = []
    root: Optional[Expression] = None

    for position, token in enumerate(tokens):
        if root is not None:
            raise ParseError(f"Trailing token {token!r} at position {position} after the expression closed")
        if token in OPERATORS:
            stack.append(Expression(token))
        elif token == CLOSE:
            if not stack:
                raise ParseError(f"Unbalanced ']' at position {position}")
            done = stack.pop()
            if not done.args:
                raise ParseError(f"Operator {done.op} at position {position} closed without arguments")
            if stack:
                stack[-1].args.append(done)
            else:
                root = done
        elif token in DIGITS:
            if not stack:
                raise ParseError(f"Digit {token} at position {position} outside any operator")
            stack[-1].args.append(int(token))
        else:
            raise ParseError(f"Unknown token {token!r} at position {position}")

    if stack or root is None:
        raise ParseError("Unclosed operator at end of expression")
    return root


def gold_trace(sample: ListOpsSample) -> List[int]:
    """Merge order that reduces each operator scope innermost-first.

    Within a scope the operator token absorbs its arguments left to right,
    nested scopes are fully reduced before they are absorbed and the closing
    bracket is absorbed last.
    """
    trace: List[int] = []

    def reduce(expr: Expression, position: int):
        for arg in expr.args:
            if isinstance(arg, Expression):
                reduce(arg, position + 1)
            trace.append(position)
        trace.append(position)

    reduce(parse(sample.tokens), 0)
    return trace


def _build(cfg: GenConfig, rng: random.Random, depth: int) -> Expression:
    expr = Expression(rng.choice(OPERATORS))
    for _ in range(rng.randint(cfg.min_args, cfg.max_args)):
        if depth < cfg.max_depth and rng.random() < cfg.branch_prob:
            expr.args.append(_build(cfg, rng, depth + 1))
        else:
            expr.args.append(rng.randint(cfg.value_low, cfg.value_high))
    return expr


def generate_sample(cfg: GenConfig, rng: random.Random, with_trace: bool = True) -> ListOpsSample:
    """Draw expressions until one fits the length bounds"""
    cfg.validate()
    for _ in range(MAX_TRIES):
        expr = _build(cfg, rng, 1)
        tokens = expr.tokens()
        if cfg.min_length <= len(tokens) <= cfg.max_length:
            sample = ListOpsSample(tokens, evaluate(expr))
            if with_trace:
                sample.gold_trace = gold_trace(sample)
            return sample
    raise ConfigError(f"No expression within lengths [{cfg.min_length}, {cfg.max_length}] "
                      f"after {MAX_TRIES} draws (depth <= {cfg.max_depth}, args <= {cfg.max_args})")


def generate_dataset(cfg: GenConfig, count: int, rng: Optional[random.Random] = None) -> List[ListOpsSample]:
    rng = rng or random.Random(cfg.seed)
    return [generate_sample(cfg, rng) for _ in range(count)]
