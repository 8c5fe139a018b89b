"""Pydantic models for the JSON file formats and their conversion to domain values."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from tcadist.core.errors import raise_parse_error, raise_usage_error
from tcadist.core.reconfig import Action, Connect, Disc, Move, Nop, Op, Swap, all_actions
from tcadist.core.rldfa import RlDfa, TransitionTable, from_table, reachable
from tcadist.core.topology import Tca, Tree
from tcadist.core.versioning import FORMAT_VERSION


class Document(BaseModel):
    """Common header of every file: ``format-version`` and ``kind``."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    format_version: Literal[1] = Field(
        default=FORMAT_VERSION, alias="format-version", description="File format version"
    )


def _unique(names: list[str], what: str) -> list[str]:
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate {what} names")
    if any(not name or any(ch.isspace() for ch in name) for name in names):
        raise ValueError(f"{what} names must be nonempty and contain no whitespace")
    return names


class EdgeDoc(BaseModel):
    """Tree edge from parent to child with its label."""

    model_config = ConfigDict(extra="forbid")

    parent: str = Field(..., description="Parent process name")
    child: str = Field(..., description="Child process name")
    label: int = Field(..., description="Edge label", ge=1)


class TcaDocument(Document):
    kind: Literal["tca"] = "tca"
    processes: list[str] = Field(..., description="Process names in id order", min_length=1)
    channels: list[str] = Field(..., description="Channel names in id order")
    root: str = Field(..., description="Root process name")
    edges: list[EdgeDoc] = Field(default_factory=list, description="Tree edges by label")
    arch: dict[str, list[str]] = Field(..., description="Members of each channel")

    @field_validator("processes")
    @classmethod
    def _processes_unique(cls, value: list[str]) -> list[str]:
        return _unique(value, "process")

    @field_validator("channels")
    @classmethod
    def _channels_unique(cls, value: list[str]) -> list[str]:
        return _unique(value, "channel")


class WordDocument(Document):
    kind: Literal["word"] = "word"
    actions: list[str] = Field(default_factory=list, description="Actions in textual form")


class WordsDocument(Document):
    kind: Literal["words"] = "words"
    words: list[list[str]] = Field(default_factory=list, description="Several words")


class TransitionDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    source: str = Field(..., alias="from", description="Source state")
    action: str = Field(..., description="Action in textual form")
    target: str = Field(..., alias="to", description="Target state")


class RlDfaDocument(Document):
    kind: Literal["rldfa"] = "rldfa"
    arch0: TcaDocument = Field(..., description="Initial architecture")
    states: list[str] = Field(..., description="State names", min_length=1)
    initial: str = Field(..., description="Initial state")
    final: list[str] = Field(default_factory=list, description="Accepting states")
    transitions: list[TransitionDoc] = Field(default_factory=list, description="Defined steps")


@dataclass(frozen=True)
class Universe:
    """Names of processes and channels; ids are positions."""

    processes: tuple[str, ...]
    channels: tuple[str, ...]

    def pid(self, name: str) -> int:
        try:
            return self.processes.index(name)
        except ValueError:
            raise_usage_error(f"unknown process {name!r}")

    def cid(self, name: str) -> int:
        try:
            return self.channels.index(name)
        except ValueError:
            raise_usage_error(f"unknown channel {name!r}")

    def process_list(self, ids: Any) -> str:
        return ",".join(self.processes[p] for p in sorted(ids))


def parse_json(text: str) -> Any:
    """
    Parse JSON text.

    Raises:
        ParseError: With the line and column of the failure
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise_parse_error(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise_parse_error(f"cannot read {path}: {exc.strerror}", details={"path": str(path)})
    except UnicodeDecodeError as exc:
        raise_parse_error(
            f"{path}: not valid UTF-8", details={"path": str(path), "offset": exc.start}
        )


def _validate(model: type[Document], payload: Any) -> Any:
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise_parse_error(
            f"invalid {model.__name__}: {where}: {first['msg']}",
            details={"errors": len(exc.errors())},
        )


def load_document(text: str) -> TcaDocument | WordDocument | WordsDocument | RlDfaDocument:
    """Parse any document, dispatching on ``kind``."""
    payload = parse_json(text)
    if not isinstance(payload, dict):
        raise_parse_error("document must be a JSON object")
    models = {
        "tca": TcaDocument,
        "word": WordDocument,
        "words": WordsDocument,
        "rldfa": RlDfaDocument,
    }
    kind = payload.get("kind")
    if kind not in models:
        raise_parse_error(f"unknown document kind {kind!r}")
    return _validate(models[kind], payload)


def load_kind(path: str | Path, model: type[Document]) -> Any:
    doc = load_document(read_text(path))
    if not isinstance(doc, model):
        raise_usage_error(f"{path}: expected a {model.__name__}, got kind {doc.kind!r}")
    return doc


def dump_document(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(by_alias=True), indent=2, ensure_ascii=False) + "\n"


def universe_of(doc: TcaDocument) -> Universe:
    return Universe(processes=tuple(doc.processes), channels=tuple(doc.channels))


def to_tca(doc: TcaDocument) -> tuple[Tca, Universe]:
    """
    Build the TCA a document describes; the TCA conditions are not checked.

    Raises:
        UsageError: On unknown names, a broken tree or channels missing from ``arch``
    """
    universe = universe_of(doc)
    n = len(doc.processes)
    if n == 1 and doc.channels:
        raise_usage_error("a single process cannot carry channels")
    if set(doc.arch) != set(doc.channels):
        raise_usage_error(
            "arch must list exactly the declared channels",
            {"missing": sorted(set(doc.channels) - set(doc.arch)),
             "unknown": sorted(set(doc.arch) - set(doc.channels))},
        )
    edges = [(universe.pid(e.parent), universe.pid(e.child), e.label) for e in doc.edges]
    if len(edges) != n - 1:
        raise_usage_error("a tree over n processes has n-1 edges", {"edges": len(edges)})
    tree = Tree.from_edges(n, universe.pid(doc.root), edges)
    arch = tuple(
        frozenset(universe.pid(name) for name in doc.arch[channel]) for channel in doc.channels
    )
    return Tca(arch=arch, tree=tree), universe


def from_tca(tca: Tca, universe: Universe) -> TcaDocument:
    names = universe.processes
    return TcaDocument(
        processes=list(names),
        channels=list(universe.channels),
        root=names[tca.tree.root],
        edges=[
            EdgeDoc(parent=names[up], child=names[down], label=lab)
            for up, down, lab in tca.tree.edges()
        ],
        arch={
            universe.channels[c]: [names[p] for p in sorted(members)]
            for c, members in enumerate(tca.arch)
        },
    )


def parse_action(text: str, universe: Universe) -> Action:
    """
    Parse ``<channel> <op> <args...>``, e.g. ``c1 swap 1`` or ``c1 conn 1 c2``.

    Raises:
        ParseError: On malformed text
    """
    parts = text.split()
    if len(parts) < 2:
        raise_parse_error(f"action {text!r} needs a channel and an operation")
    channel, kind, args = parts[0], parts[1], parts[2:]
    if channel not in universe.channels:
        raise_parse_error(f"action {text!r}: unknown channel {channel!r}")
    arity = {"nop": 0, "swap": 1, "move": 2, "conn": 2, "disc": 1}
    if kind not in arity:
        raise_parse_error(f"action {text!r}: unknown operation {kind!r}")
    if len(args) != arity[kind]:
        raise_parse_error(f"action {text!r}: {kind} takes {arity[kind]} argument(s)")
    labels = args[:1] if kind == "conn" else args
    if not all(label.isdigit() for label in labels):
        raise_parse_error(f"action {text!r}: edge labels must be integers")
    numbers = [int(label) for label in labels]
    op: Op
    if kind == "nop":
        op = Nop()
    elif kind == "swap":
        op = Swap(numbers[0])
    elif kind == "move":
        op = Move(numbers[0], numbers[1])
    elif kind == "disc":
        op = Disc(numbers[0])
    else:
        if args[1] not in universe.channels:
            raise_parse_error(f"action {text!r}: unknown channel {args[1]!r}")
        op = Connect(numbers[0], universe.channels.index(args[1]))
    return Action(universe.channels.index(channel), op)


def format_action(a: Action, universe: Universe) -> str:
    channel = universe.channels[a.channel]
    op = a.op
    if isinstance(op, Nop):
        return f"{channel} nop"
    if isinstance(op, Swap):
        return f"{channel} swap {op.e}"
    if isinstance(op, Move):
        return f"{channel} move {op.e} {op.target}"
    if isinstance(op, Connect):
        return f"{channel} conn {op.e} {universe.channels[op.channel]}"
    return f"{channel} disc {op.e}"


def to_words(doc: WordDocument | WordsDocument, universe: Universe) -> list[list[Action]]:
    texts = [doc.actions] if isinstance(doc, WordDocument) else doc.words
    return [[parse_action(text, universe) for text in word] for word in texts]


def from_words(words: list[list[Action]], universe: Universe) -> WordsDocument:
    return WordsDocument(words=[[format_action(a, universe) for a in word] for word in words])


def from_word(word: list[Action], universe: Universe) -> WordDocument:
    return WordDocument(actions=[format_action(a, universe) for a in word])


def to_rldfa(doc: RlDfaDocument) -> tuple[RlDfa, Universe]:
    """
    Explicit automaton from a document; absent transitions are undefined.

    When every reachable state comes with a single architecture the automaton also
    knows the architecture of each state.
    """
    arch0, universe = to_tca(doc.arch0)
    states = set(doc.states)
    if len(states) != len(doc.states):
        raise_usage_error("duplicate state names")
    unknown = ({doc.initial} | set(doc.final)) - states
    table: dict[tuple[str, Action], str] = {}
    for t in doc.transitions:
        unknown |= {t.source, t.target} - states
        key = (t.source, parse_action(t.action, universe))
        if key in table and table[key] != t.target:
            raise_usage_error("nondeterministic transition", {"from": t.source, "action": t.action})
        table[key] = t.target
    if unknown:
        raise_usage_error("transitions name undeclared states", {"states": sorted(unknown)})
    dfa = from_table(arch0, doc.initial, table, doc.final, all_actions(arch0.n, arch0.k), "file")
    seen: dict[str, Tca] = {}
    for config in reachable(dfa):
        if seen.setdefault(config.state, config.tca) != config.tca:
            return dfa, universe
    with_tca = RlDfa(
        alphabet=dfa.alphabet,
        s0=dfa.s0,
        arch0=dfa.arch0,
        delta=dfa.delta,
        is_final=dfa.is_final,
        tca_of=seen.__getitem__,
        name=dfa.name,
    )
    return with_tca, universe


def from_table_doc(table: TransitionTable, arch0: Tca, universe: Universe) -> RlDfaDocument:
    """Document of a materialized automaton; states are named ``s0``, ``s1``, ..."""
    names = {s: f"s{i}" for i, s in enumerate(table.states)}
    return RlDfaDocument(
        arch0=from_tca(arch0, universe),
        states=[names[s] for s in table.states],
        initial=names[table.s0],
        final=[names[s] for s in table.states if s in table.finals],
        transitions=[
            TransitionDoc(source=names[s], action=format_action(a, universe), target=names[t])
            for s, a, t in table.transitions
        ],
    )


def default_universe(n: int, k: int) -> Universe:
    return Universe(
        processes=tuple(f"p{i + 1}" for i in range(n)),
        channels=tuple(f"c{i + 1}" for i in range(k)),
    )
