"""Generic SLR(1) table construction for a small, conflict-free grammar.

Builds the LR(0) item-set automaton, derives FIRST/FOLLOW sets, and emits
ACTION/GOTO tables.  Construction fails loudly on any shift/reduce or
reduce/reduce conflict, so an ambiguous grammar is caught at import time
rather than at parse time.  The parser driver is table-driven bottom-up:
shift, reduce with a semantic action, accept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

Symbol = Hashable  # terminals and nonterminals share one symbol space

EPSILON = object()
END = "$end"


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[Symbol, ...]
    action: Callable[[list], object] = field(compare=False, hash=False,
                                             default=lambda v: v)

    def __repr__(self) -> str:
        rhs = " ".join(str(s) for s in self.rhs) or "<empty>"
        return f"{self.lhs} -> {rhs}"


class GrammarConflict(Exception):
    """Raised when the grammar is not SLR(1)."""


@dataclass(frozen=True)
class _Item:
    prod_index: int
    dot: int


class SlrTable:
    """ACTION/GOTO tables plus the production list driving reductions."""

    def __init__(self, productions: Sequence[Production], start: str,
                 terminals: set[Symbol]):
        self.productions = list(productions)
        self.start = start
        self.terminals = set(terminals) | {END}
        self.nonterminals = {p.lhs for p in self.productions}
        self._by_lhs: dict[str, list[int]] = {}
        for idx, p in enumerate(self.productions):
            self._by_lhs.setdefault(p.lhs, []).append(idx)
        self.first = self._compute_first()
        self.follow = self._compute_follow()
        # action[state][terminal] -> ("shift", state) | ("reduce", prod_index)
        #                           | ("accept", None)
        self.action: list[dict[Symbol, tuple[str, int | None]]] = []
        self.goto: list[dict[str, int]] = []
        self._build_automaton()

    # -- set computation -------------------------------------------------

    def _compute_first(self) -> dict[Symbol, set]:
        first: dict[Symbol, set] = {t: {t} for t in self.terminals}
        for nt in self.nonterminals:
            first[nt] = set()
        changed = True
        while changed:
            changed = False
            for p in self.productions:
                f = first[p.lhs]
                before = len(f)
                nullable_prefix = True
                for sym in p.rhs:
                    f |= first[sym] - {EPSILON}
                    if EPSILON not in first[sym]:
                        nullable_prefix = False
                        break
                if nullable_prefix:
                    f.add(EPSILON)
                changed = changed or len(f) != before
        return first

    def _compute_follow(self) -> dict[str, set]:
        follow: dict[str, set] = {nt: set() for nt in self.nonterminals}
        follow[self.start].add(END)
        changed = True
        while changed:
            changed = False
            for p in self.productions:
                trailer = set(follow[p.lhs])
                for sym in reversed(p.rhs):
                    if sym in self.nonterminals:
                        before = len(follow[sym])
                        follow[sym] |= trailer
                        changed = changed or len(follow[sym]) != before
                        if EPSILON in self.first[sym]:
                            trailer = trailer | (self.first[sym] - {EPSILON})
                        else:
                            trailer = self.first[sym] - {EPSILON}
                    else:
                        trailer = {sym}
        return follow

    # -- LR(0) automaton -------------------------------------------------

    def _closure(self, items: frozenset[_Item]) -> frozenset[_Item]:
        result = set(items)
        stack = list(items)
        while stack:
            item = stack.pop()
            prod = self.productions[item.prod_index]
            if item.dot >= len(prod.rhs):
                continue
            sym = prod.rhs[item.dot]
            if sym in self.nonterminals:
                for idx in self._by_lhs[sym]:
                    new = _Item(idx, 0)
                    if new not in result:
                        result.add(new)
                        stack.append(new)
        return frozenset(result)

    def _goto_set(self, items: frozenset[_Item], sym: Symbol) -> frozenset[_Item]:
        moved = {
            _Item(it.prod_index, it.dot + 1)
            for it in items
            if it.dot < len(self.productions[it.prod_index].rhs)
            and self.productions[it.prod_index].rhs[it.dot] == sym
        }
        return self._closure(frozenset(moved)) if moved else frozenset()

    def _build_automaton(self) -> None:
        start_items = self._closure(frozenset(
            {_Item(idx, 0) for idx in self._by_lhs[self.start]}))
        states: list[frozenset[_Item]] = [start_items]
        index = {start_items: 0}
        self.action = [{}]
        self.goto = [{}]

        pending = [0]
        while pending:
            s = pending.pop()
            items = states[s]
            symbols = {
                self.productions[it.prod_index].rhs[it.dot]
                for it in items
                if it.dot < len(self.productions[it.prod_index].rhs)
            }
            for sym in symbols:
                target = self._goto_set(items, sym)
                if target not in index:
                    index[target] = len(states)
                    states.append(target)
                    self.action.append({})
                    self.goto.append({})
                    pending.append(index[target])
                t = index[target]
                if sym in self.nonterminals:
                    self.goto[s][sym] = t
                else:
                    self._set_action(s, sym, ("shift", t))
            for it in items:
                prod = self.productions[it.prod_index]
                if it.dot == len(prod.rhs):
                    if prod.lhs == self.start:
                        self._set_action(s, END, ("accept", None))
                    else:
                        for term in self.follow[prod.lhs]:
                            self._set_action(s, term, ("reduce", it.prod_index))

    def _set_action(self, state: int, terminal: Symbol,
                    entry: tuple[str, int | None]) -> None:
        existing = self.action[state].get(terminal)
        if existing is not None and existing != entry:
            raise GrammarConflict(
                f"state {state}, terminal {terminal}: {existing} vs {entry}")
        self.action[state][terminal] = entry

    def expected_terminals(self, state: int) -> list[Symbol]:
        """Terminals with any action in ``state`` (the expected-token set)."""
        return list(self.action[state].keys())


class ParseFailure(Exception):
    """Internal signal carrying the rejecting state and offending token."""

    def __init__(self, state: int, token, expected: list[Symbol]):
        super().__init__(f"no action in state {state}")
        self.state = state
        self.token = token
        self.expected = expected


def run_parser(table: SlrTable, tokens: Sequence, terminal_of: Callable) -> object:
    """Drive the shift-reduce loop over ``tokens`` (last one must map to END).

    ``terminal_of`` maps a token object to its grammar terminal.  Returns the
    semantic value of the start symbol; raises ParseFailure on rejection.
    """
    state_stack = [0]
    value_stack: list[object] = []
    pos = 0
    while True:
        token = tokens[pos]
        terminal = terminal_of(token)
        entry = table.action[state_stack[-1]].get(terminal)
        if entry is None:
            raise ParseFailure(state_stack[-1], token,
                               table.expected_terminals(state_stack[-1]))
        kind, arg = entry
        if kind == "shift":
            state_stack.append(arg)
            value_stack.append(token)
            pos += 1
        elif kind == "reduce":
            prod = table.productions[arg]
            count = len(prod.rhs)
            if count:
                children = list(value_stack[-count:])
                del value_stack[-count:]
                del state_stack[-count:]
            else:
                children = []
            value = prod.action(children)
            value_stack.append(value)
            state_stack.append(table.goto[state_stack[-1]][prod.lhs])
        else:  # accept
            return value_stack[-1]
