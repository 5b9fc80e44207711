"""Seeded synthetic provenance corpora with injected attack-like anomalies.

Benign records are drawn from a handful of workload profiles (shell sessions,
web servers, cron jobs, package managers), each with a small fixed vocabulary
of binaries, paths, syscalls, and peer addresses.  Anomalies are built from a
campaign template whose binaries and remote addresses come from *rare pools*
that are provably disjoint from every benign vocabulary, so anomalous behavior
differs semantically — not just statistically — from the benign baseline.

Everything is driven by the package's own deterministic PRNG: identical
``(config, seed)`` always produce byte-identical corpora, on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CountExceedsDataset, InvalidConfig
from .records import NetFlow, ProcessRecord, ProvenanceEvent
from .rng import Xoshiro256StarStar, derive_seed

_BASE_TS = 1_700_000_000_000  # epoch ms; records are spaced 251 ms apart
_FIRST_PID = 1000


@dataclass(frozen=True)
class BenignProfile:
    """Template distribution for one benign workload type."""

    exes: tuple[str, ...]
    arg_choices: tuple[tuple[str, ...], ...]
    reads: tuple[str, ...]
    writes: tuple[str, ...]
    syscalls: tuple[str, ...]
    event_kinds: tuple[str, ...]  # kinds drawn per event slot
    ips: tuple[str, ...]
    ports: tuple[int, ...]
    parents: tuple[tuple[int, str], ...]
    netflow_p: float


PROFILES: dict[str, BenignProfile] = {
    "shell_session": BenignProfile(
        exes=("/bin/bash", "/usr/bin/vim", "/bin/ls", "/bin/cat", "/usr/bin/grep", "/usr/bin/less"),
        arg_choices=((), ("-l",), ("--color=auto",), ("-n", "20")),
        reads=(
            "/home/alice/notes.txt",
            "/home/alice/.bashrc",
            "/home/bob/projects/main.py",
            "/home/bob/todo.md",
            "/etc/hosts",
        ),
        writes=("/home/alice/draft.txt", "/home/alice/.viminfo", "/home/bob/.bash_history"),
        syscalls=("open", "close", "mmap", "stat", "ioctl"),
        event_kinds=("file_read", "file_write", "syscall", "fork"),
        ips=("10.0.0.8",),
        ports=(22,),
        parents=((412, "/usr/sbin/sshd"), (413, "/usr/sbin/sshd")),
        netflow_p=0.15,
    ),
    "web_server": BenignProfile(
        exes=("/usr/sbin/nginx", "/usr/sbin/apache2"),
        arg_choices=((), ("-g", "daemon off;"), ("-k", "start")),
        reads=(
            "/var/www/html/index.html",
            "/var/www/html/app.js",
            "/var/www/html/style.css",
            "/etc/nginx/nginx.conf",
        ),
        writes=("/var/log/nginx/access.log", "/var/log/apache2/error.log"),
        syscalls=("accept", "sendto", "recvfrom", "epoll_wait"),
        event_kinds=("file_read", "file_write", "syscall"),
        ips=("192.168.1.20", "192.168.1.21", "192.168.1.30"),
        ports=(80, 443),
        parents=((1, "/sbin/init"),),
        netflow_p=0.9,
    ),
    "cron_job": BenignProfile(
        exes=("/usr/sbin/cron", "/bin/sh"),
        arg_choices=((), ("-c", "/usr/local/bin/backup.sh")),
        reads=("/etc/crontab", "/etc/cron.d/backup", "/etc/environment"),
        writes=("/var/log/syslog", "/var/spool/cron/state"),
        syscalls=("clone", "wait4", "open", "nanosleep"),
        event_kinds=("file_read", "file_write", "syscall", "fork"),
        ips=(),
        ports=(),
        parents=((1, "/sbin/init"),),
        netflow_p=0.0,
    ),
    "package_manager": BenignProfile(
        exes=("/usr/bin/apt-get", "/usr/bin/dpkg"),
        arg_choices=(("update",), ("install", "-y", "curl"), ("--configure", "-a")),
        reads=("/var/lib/dpkg/status", "/var/lib/apt/lists/archive", "/etc/apt/sources.list"),
        writes=("/var/cache/apt/archives/partial.lock", "/var/lib/dpkg/lock-frontend"),
        syscalls=("open", "fsync", "rename", "flock"),
        event_kinds=("file_read", "file_write", "syscall"),
        ips=("10.1.0.5", "10.1.0.6"),
        ports=(80,),
        parents=((890, "/bin/bash"), (1, "/sbin/init")),
        netflow_p=0.5,
    ),
}

#: Every binary that can appear in a benign record (exe, parent exe).
BENIGN_BINARIES: frozenset[str] = frozenset(
    b for p in PROFILES.values() for b in p.exes
) | frozenset(pexe for p in PROFILES.values() for _, pexe in p.parents)

#: Every remote address that can appear in a benign record.
BENIGN_IPS: frozenset[str] = frozenset(ip for p in PROFILES.values() for ip in p.ips)

CAMPAIGN_STAGES = ("dropper_exec", "c2_netflow", "credential_file_write", "lateral_fork")

C2_PORTS = (1337, 4444, 8443, 9001)

CREDENTIAL_TARGETS = ("/etc/passwd", "/etc/shadow", "/root/.ssh/authorized_keys")


@dataclass(frozen=True)
class CampaignConfig:
    """Attack-campaign template: ordered stages plus the rare vocabularies they draw from."""

    stages: tuple[str, ...] = CAMPAIGN_STAGES
    rare_binary_pool: tuple[str, ...] = (
        "/dev/shm/.cache/updaterd",
        "/var/tmp/.x11/kworkerd",
        "/home/alice/.local/.hidden/sysupd",
    )
    rare_ip_pool: tuple[str, ...] = ("185.220.101.34", "45.146.165.37", "91.219.236.18")


@dataclass(frozen=True)
class SynthConfig:
    """Generator configuration. ``contamination`` is the anomalous fraction in [0, 1)."""

    n_processes: int
    contamination: float = 0.0
    benign_profiles: tuple[str, ...] = tuple(PROFILES)
    seed: int = 0
    campaign: CampaignConfig = field(default_factory=CampaignConfig)

    def __post_init__(self) -> None:
        validate_config(self)


def validate_config(config: SynthConfig) -> SynthConfig:
    if config.n_processes < 1:
        raise InvalidConfig(f"n_processes must be >= 1, got {config.n_processes}")
    if not 0.0 <= config.contamination < 1.0:
        raise InvalidConfig(f"contamination must be in [0, 1), got {config.contamination}")
    if not config.benign_profiles:
        raise InvalidConfig("benign_profiles must not be empty")
    for name in config.benign_profiles:
        if name not in PROFILES:
            raise InvalidConfig(f"unknown benign profile {name!r}")
    validate_campaign(config.campaign)
    return config


def validate_campaign(campaign: CampaignConfig) -> CampaignConfig:
    if not campaign.stages:
        raise InvalidConfig("campaign needs at least one stage")
    for stage in campaign.stages:
        if stage not in CAMPAIGN_STAGES:
            raise InvalidConfig(f"unknown campaign stage {stage!r}")
    overlap_bin = set(campaign.rare_binary_pool) & BENIGN_BINARIES
    if overlap_bin:
        raise InvalidConfig(f"rare_binary_pool overlaps benign vocabulary: {sorted(overlap_bin)}")
    overlap_ip = set(campaign.rare_ip_pool) & BENIGN_IPS
    if overlap_ip:
        raise InvalidConfig(f"rare_ip_pool overlaps benign vocabulary: {sorted(overlap_ip)}")
    needs_bin = {"dropper_exec", "lateral_fork"} & set(campaign.stages)
    if needs_bin and not campaign.rare_binary_pool:
        raise InvalidConfig("stages need a non-empty rare_binary_pool")
    if "c2_netflow" in campaign.stages and not campaign.rare_ip_pool:
        raise InvalidConfig("c2_netflow needs a non-empty rare_ip_pool")
    return campaign


def anomaly_count(n: int, contamination: float) -> int:
    """Number of anomalies for a dataset size: contamination·n truncated toward zero.

    The tiny epsilon absorbs float representation error on products that are
    mathematically integers (e.g. 0.29 × 100).
    """
    return int(contamination * n + 1e-9)


def _benign_record(rng: Xoshiro256StarStar, pid: int, ts: int,
                   profile_names: tuple[str, ...]) -> ProcessRecord:
    prof = PROFILES[rng.choice(profile_names)]
    exe = rng.choice(prof.exes)
    args = rng.choice(prof.arg_choices)
    events = []
    for _ in range(1 + rng.randbelow(4)):
        kind = rng.choice(prof.event_kinds)
        if kind == "file_read":
            events.append(ProvenanceEvent("file_read", "read", rng.choice(prof.reads)))
        elif kind == "file_write":
            events.append(ProvenanceEvent("file_write", "write", rng.choice(prof.writes)))
        elif kind == "syscall":
            events.append(ProvenanceEvent("syscall", rng.choice(prof.syscalls)))
        else:
            events.append(ProvenanceEvent("fork", "fork"))
    netflows = []
    if prof.ips and rng.random() < prof.netflow_p:
        netflows.append(NetFlow(rng.choice(prof.ips), rng.choice(prof.ports), "tcp"))
    parent = rng.choice(prof.parents)
    return ProcessRecord(
        pid=pid,
        exe=exe,
        args=args,
        parent=parent,
        events=tuple(events),
        netflows=tuple(netflows),
        label=0,
        ts=ts,
    )


def _campaign_record(rng: Xoshiro256StarStar, campaign: CampaignConfig,
                     pid: int, ts: int) -> ProcessRecord:
    exe = None
    args: tuple[str, ...] = ()
    parent = None
    events: list[ProvenanceEvent] = []
    netflows: list[NetFlow] = []
    for stage in campaign.stages:
        if stage == "dropper_exec":
            exe = rng.choice(campaign.rare_binary_pool)
        elif stage == "c2_netflow":
            netflows.append(NetFlow(rng.choice(campaign.rare_ip_pool), rng.choice(C2_PORTS), "tcp"))
        elif stage == "credential_file_write":
            events.append(ProvenanceEvent("file_write", "write", rng.choice(CREDENTIAL_TARGETS)))
        elif stage == "lateral_fork":
            events.append(ProvenanceEvent("fork", "fork"))
            events.append(ProvenanceEvent("exec", rng.choice(campaign.rare_binary_pool)))
            parent = (2000 + rng.randbelow(500), rng.choice(campaign.rare_binary_pool))
    return ProcessRecord(
        pid=pid,
        exe=exe,
        args=args,
        parent=parent,
        events=tuple(events),
        netflows=tuple(netflows),
        label=1,
        ts=ts,
    )


def inject_anomalies(records: list[ProcessRecord], campaign: CampaignConfig,
                     count: int, seed: int) -> list[ProcessRecord]:
    """Replace ``count`` records with campaign-generated anomalies (label 1).

    Replacement positions are drawn uniformly without replacement; each
    injected record keeps the pid and timestamp of the record it replaces.
    ``count=0`` returns an unchanged copy.
    """
    validate_campaign(campaign)
    if count > len(records):
        raise CountExceedsDataset(f"cannot inject {count} anomalies into {len(records)} records")
    out = list(records)
    if count == 0:
        return out
    rng = Xoshiro256StarStar(seed)
    for pos in rng.sample_indices(len(records), count):
        old = records[pos]
        out[pos] = _campaign_record(rng, campaign, pid=old.pid, ts=old.ts)
    return out


def generate_dataset(config: SynthConfig) -> list[ProcessRecord]:
    """Generate a full corpus: benign records from the profiles, then injected anomalies.

    Benign generation and injection consume independent PRNG streams derived
    from ``config.seed``, so the benign population is identical whether or not
    anomalies are injected afterward.
    """
    validate_config(config)
    rng = Xoshiro256StarStar(derive_seed(config.seed, "benign"))
    records = [
        _benign_record(rng, pid=_FIRST_PID + i, ts=_BASE_TS + i * 251,
                       profile_names=config.benign_profiles)
        for i in range(config.n_processes)
    ]
    count = anomaly_count(config.n_processes, config.contamination)
    if count:
        records = inject_anomalies(records, config.campaign, count,
                                   derive_seed(config.seed, "inject"))
    return records
