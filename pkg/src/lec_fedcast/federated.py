"""Federated orchestration: local client training, five server aggregation
rules, and the broadcast -> train -> aggregate round loop.

Clients are stateful across rounds (their Adam moments and batch-shuffle
generator persist), which makes a single-client federated session reduce
exactly to uninterrupted local training. Only ClientUpdate values cross the
client -> server boundary; the aggregation functions never see raw windows.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn
from .datasynth import UserDataset
from .seeding import make_rng

STRATEGY_NAMES = ("fedavg", "fedmedian", "fedprox", "fedadam", "fedyogi")


class TrainingDivergedError(RuntimeError):
    """Local training produced a non-finite loss."""


@dataclass(frozen=True)
class AggregationStrategy:
    """Server rule plus its hyperparameters.

    ``mu`` is the FedProx proximal weight (clients of other strategies train
    with mu = 0); ``eta``/``beta1``/``beta2``/``tau`` drive the FedAdam and
    FedYogi server optimizers.
    """

    name: str
    mu: float = 0.0
    eta: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.99
    tau: float = 1e-3

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {self.name!r}; "
                             f"expected one of {STRATEGY_NAMES}")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.eta <= 0 or self.tau <= 0:
            raise ValueError("eta and tau must be positive")

    @property
    def client_mu(self) -> float:
        return self.mu if self.name == "fedprox" else 0.0


def default_strategy(name: str, **overrides) -> AggregationStrategy:
    """Strategy with its documented defaults (fedprox uses mu = 0.01)."""
    if name == "fedprox":
        overrides.setdefault("mu", 0.01)
    return AggregationStrategy(name=name, **overrides)


@dataclass
class ClientUpdate:
    """What a client sends back after local training; never raw data."""

    client_id: int
    n_k: int
    params: np.ndarray
    train_loss: list[float]


class ClientState:
    """One community member: its windows plus persistent trainer state."""

    def __init__(self, client_id: int, train_x: np.ndarray, train_y: np.ndarray,
                 test_x: np.ndarray, test_y: np.ndarray, shape: nn.ModelShape,
                 params: np.ndarray, adam: nn.AdamState,
                 rng: np.random.Generator, batch_size: int = 32):
        if len(train_x) < 1:
            raise ValueError(f"client {client_id} has no training windows")
        self.client_id = client_id
        self.train_x = train_x
        self.train_y = train_y
        self.test_x = test_x
        self.test_y = test_y
        self.shape = shape
        self.params = params
        self.adam = adam
        self.rng = rng
        self.batch_size = batch_size

    @property
    def n_k(self) -> int:
        return len(self.train_x)


def make_client(client_id: int, dataset: UserDataset, shape: nn.ModelShape,
                initial_params: np.ndarray, batch_seed: int,
                batch_size: int = 32, lr: float = 1e-3, beta1: float = 0.9,
                beta2: float = 0.999, epsilon: float = 1e-8) -> ClientState:
    return ClientState(
        client_id=client_id,
        train_x=dataset.train_x, train_y=dataset.train_y,
        test_x=dataset.test_x, test_y=dataset.test_y,
        shape=shape,
        params=np.asarray(initial_params, dtype=float).copy(),
        adam=nn.adam_init(shape.n_params(), lr=lr, beta1=beta1,
                          beta2=beta2, epsilon=epsilon),
        rng=np.random.default_rng(batch_seed),
        batch_size=batch_size,
    )


def train_epochs(params: np.ndarray, adam: nn.AdamState, rng: np.random.Generator,
                 x: np.ndarray, y: np.ndarray, shape: nn.ModelShape, epochs: int,
                 batch_size: int, mu: float = 0.0,
                 anchor: np.ndarray | None = None,
                 client_id: int | None = None,
                 ) -> tuple[np.ndarray, nn.AdamState, list[float]]:
    """Mini-batch Adam on MSE (+ optional proximal pull toward ``anchor``).

    Returns (params, adam, per-epoch mean training MSE). The proximal term is
    excluded from the reported loss; it is a regularizer, not a fit metric.
    """
    n = len(x)
    prox = (mu, anchor) if mu > 0.0 else None
    losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for batch_idx, start in enumerate(range(0, n, batch_size)):
            take = order[start:start + batch_size]
            model = nn.unflatten(params, shape)
            preds, cache = nn.forward_batch(model, x[take])
            loss = nn.mse_loss(preds, y[take])
            if not np.isfinite(loss):
                who = f"client {client_id}" if client_id is not None else "trainer"
                raise TrainingDivergedError(
                    f"{who}: non-finite loss at batch {batch_idx}")
            grad = nn.backward_batch(model, cache, y[take], prox=prox)
            params, adam = nn.adam_step(params, grad, adam)
            loss_sum += loss * len(take)
        losses.append(loss_sum / n)
    return params, adam, losses


def client_local_train(state: ClientState, global_params: np.ndarray,
                       epochs: int, mu: float = 0.0) -> ClientUpdate:
    """Download the global model, train locally, return the update.

    The proximal anchor stays pinned to ``global_params`` for the whole call;
    the caller's global vector is never mutated.
    """
    global_params = np.asarray(global_params, dtype=float)
    expected = state.shape.n_params()
    if global_params.shape != (expected,):
        raise nn.ShapeError(f"global parameter vector has {global_params.size} "
                            f"entries, expected {expected}")
    anchor = global_params.copy()
    state.params = global_params.copy()
    state.params, state.adam, losses = train_epochs(
        state.params, state.adam, state.rng, state.train_x, state.train_y,
        state.shape, epochs, state.batch_size, mu=mu, anchor=anchor,
        client_id=state.client_id)
    return ClientUpdate(state.client_id, state.n_k, state.params.copy(), losses)


# --- server-side aggregation --------------------------------------------------

def _sorted_param_stack(updates: list[ClientUpdate]) -> tuple[np.ndarray, np.ndarray]:
    if not updates:
        raise ValueError("cannot aggregate an empty update list")
    ordered = sorted(updates, key=lambda u: u.client_id)
    size = ordered[0].params.size
    for u in ordered:
        if u.params.size != size:
            raise nn.ShapeError(f"client {u.client_id} update has {u.params.size} "
                                f"entries, expected {size}")
    stack = np.stack([u.params for u in ordered])
    weights = np.array([u.n_k for u in ordered], dtype=float)
    return stack, weights


def aggregate_fedavg(updates: list[ClientUpdate]) -> np.ndarray:
    """Sample-count-weighted mean: sum_k (n_k / n) * params_k."""
    stack, weights = _sorted_param_stack(updates)
    weights = weights / weights.sum()
    return np.einsum("k,kp->p", weights, stack)


def aggregate_fedmedian(updates: list[ClientUpdate]) -> np.ndarray:
    """Coordinate-wise median (even counts: mean of the two central values)."""
    stack, _ = _sorted_param_stack(updates)
    return np.median(stack, axis=0)


def aggregate_fedprox(updates: list[ClientUpdate]) -> np.ndarray:
    """Server rule identical to FedAvg; the proximal term lives client-side."""
    return aggregate_fedavg(updates)


@dataclass
class ServerState:
    """Global parameters plus round counter and (for FedAdam/FedYogi) moments."""

    params: np.ndarray
    strategy: AggregationStrategy
    round: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None


def make_server(initial_params: np.ndarray,
                strategy: AggregationStrategy) -> ServerState:
    params = np.asarray(initial_params, dtype=float).copy()
    m = v = None
    if strategy.name in ("fedadam", "fedyogi"):
        m = np.zeros_like(params)
        v = np.full_like(params, strategy.tau ** 2)
    return ServerState(params=params, strategy=strategy, m=m, v=v)


def _adaptive_update(updates: list[ClientUpdate], server: ServerState,
                     yogi: bool) -> tuple[np.ndarray, ServerState]:
    s = server.strategy
    delta = aggregate_fedavg(updates) - server.params
    m = s.beta1 * server.m + (1.0 - s.beta1) * delta
    delta_sq = delta * delta
    if yogi:
        v = server.v - (1.0 - s.beta2) * delta_sq * np.sign(server.v - delta_sq)
    else:
        v = s.beta2 * server.v + (1.0 - s.beta2) * delta_sq
    params = server.params + s.eta * m / (np.sqrt(v) + s.tau)
    return params, replace(server, params=params, m=m, v=v)


def aggregate_fedadam(updates: list[ClientUpdate],
                      server: ServerState) -> tuple[np.ndarray, ServerState]:
    """Server Adam on the pseudo-gradient delta = weighted_avg(params_k) - w."""
    return _adaptive_update(updates, server, yogi=False)


def aggregate_fedyogi(updates: list[ClientUpdate],
                      server: ServerState) -> tuple[np.ndarray, ServerState]:
    """Server Yogi: v moves toward delta^2 only as fast as their gap's sign."""
    return _adaptive_update(updates, server, yogi=True)


def apply_aggregation(server: ServerState,
                      updates: list[ClientUpdate]) -> ServerState:
    """One server step under the configured strategy; bumps the round counter.

    This is the entire server-side interface: it consumes ClientUpdate values
    only.
    """
    name = server.strategy.name
    if name in ("fedavg", "fedprox"):
        params = aggregate_fedavg(updates)
        server = replace(server, params=params)
    elif name == "fedmedian":
        server = replace(server, params=aggregate_fedmedian(updates))
    elif name == "fedadam":
        _, server = aggregate_fedadam(updates, server)
    else:
        _, server = aggregate_fedyogi(updates, server)
    return replace(server, round=server.round + 1)


# --- evaluation and the round loop ---------------------------------------------

def evaluate_params(params: np.ndarray, shape: nn.ModelShape, x: np.ndarray,
                    y: np.ndarray, chunk: int = 512) -> float:
    """Mean window MSE of ``params`` on (x, y); forward passes only."""
    model = nn.unflatten(params, shape)
    total = 0.0
    for start in range(0, len(x), chunk):
        preds, _ = nn.forward_batch(model, x[start:start + chunk])
        diff = preds - y[start:start + chunk]
        total += float(np.sum(diff * diff))
    return total / (len(x) * y.shape[1])


@dataclass
class RoundReport:
    round: int
    participant_ids: list[int]
    train_losses: dict[int, list[float]]
    test_mse: dict[int, float]
    global_test_mse: float
    global_params: np.ndarray | None = None


@dataclass
class SessionReport:
    strategy: AggregationStrategy
    initial_params: np.ndarray
    final_params: np.ndarray
    rounds: list[RoundReport] = field(default_factory=list)

    @property
    def global_mse_trace(self) -> list[float]:
        return [r.global_test_mse for r in self.rounds]

    @property
    def final_test_mse(self) -> dict[int, float]:
        return self.rounds[-1].test_mse if self.rounds else {}


def _select_participants(clients: list[ClientState], participation: float,
                         rng: np.random.Generator | None) -> list[ClientState]:
    ordered = sorted(clients, key=lambda c: c.client_id)
    if participation >= 1.0 or rng is None:
        return ordered
    count = max(1, int(round(participation * len(ordered))))
    picked = rng.choice(len(ordered), size=count, replace=False)
    return [ordered[i] for i in sorted(picked)]


def run_round(server: ServerState, clients: list[ClientState], epochs: int,
              participation: float = 1.0,
              rng: np.random.Generator | None = None,
              threads: int = 1) -> tuple[ServerState, RoundReport]:
    """Broadcast -> local train -> aggregate -> evaluate.

    The outcome is independent of client list order and of ``threads``:
    participants are canonically sorted and each client owns its state.
    """
    if not clients:
        raise ValueError("run_round needs at least one client")
    participants = _select_participants(clients, participation, rng)
    global_params = server.params
    mu = server.strategy.client_mu

    def fit(client: ClientState) -> ClientUpdate:
        return client_local_train(client, global_params, epochs, mu=mu)

    if threads > 1 and len(participants) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            updates = list(pool.map(fit, participants))
    else:
        updates = [fit(client) for client in participants]
    updates.sort(key=lambda u: u.client_id)

    server = apply_aggregation(server, updates)

    test_mse = {}
    for client in sorted(clients, key=lambda c: c.client_id):
        if len(client.test_x):
            test_mse[client.client_id] = evaluate_params(
                server.params, client.shape, client.test_x, client.test_y)
    global_mse = float(np.mean(list(test_mse.values()))) if test_mse else float("nan")

    report = RoundReport(
        round=server.round,
        participant_ids=[u.client_id for u in updates],
        train_losses={u.client_id: list(u.train_loss) for u in updates},
        test_mse=test_mse,
        global_test_mse=global_mse,
        global_params=server.params.copy(),
    )
    return server, report


def run_session(clients: list[ClientState], strategy: AggregationStrategy,
                rounds: int, epochs: int, initial_params: np.ndarray,
                participation: float = 1.0, seed: int = 0,
                threads: int = 1) -> SessionReport:
    """A full federated session from a given initial model; reproducible per seed."""
    server = make_server(initial_params, strategy)
    report = SessionReport(strategy=strategy,
                           initial_params=np.asarray(initial_params, dtype=float).copy(),
                           final_params=server.params)
    for round_idx in range(rounds):
        rng = (make_rng(seed, "participation", round_idx)
               if participation < 1.0 else None)
        server, round_report = run_round(server, clients, epochs,
                                         participation=participation,
                                         rng=rng, threads=threads)
        report.rounds.append(round_report)
    report.final_params = server.params.copy()
    return report
