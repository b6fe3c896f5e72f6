"""Command line front door: index management, curation, and the service."""

from __future__ import annotations

import pathlib
import sys

import click

from . import media_curation, retrieval_index
from .retrieval_index import default_nlist, default_nprobe
from .session_service import ServiceConfig, build_pipeline, create_app


@click.group()
def main() -> None:
    """Emotion-aware music journey tooling."""


@main.group()
def index() -> None:
    """Build and query clip-embedding indexes."""


@index.command("build")
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--nlist", type=int, default=None, help="Defaults to ceil(sqrt(N)).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def index_build(embeddings_path: str, nlist: int | None, seed: int, out_path: str) -> None:
    """Cluster an embedding ingest file into an index snapshot."""
    embeddings = retrieval_index.read_embeddings(embeddings_path)
    if nlist is None:
        nlist = default_nlist(len(embeddings))
    built = retrieval_index.build_index(embeddings, nlist, seed)
    retrieval_index.save_index(out_path, built)
    click.echo(f"indexed {built.size} embeddings into {built.nlist} lists -> {out_path}")


@index.command("search")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--text", required=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--nprobe", type=int, default=None, help="Defaults to max(1, nlist/8).")
def index_search(index_path: str, text: str, k: int, nprobe: int | None) -> None:
    """Encode a prompt with the bundled hashing encoder and search."""
    idx = retrieval_index.load_index(index_path)
    if nprobe is None:
        nprobe = default_nprobe(idx.nlist)
    query = retrieval_index.stub_encode(text, idx.d)
    result = retrieval_index.search(idx, query, k, nprobe)
    for hit in result.hits:
        click.echo(f"{hit.clip_id}\t{hit.similarity:.6f}")


@index.command("recall")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--queries", "queries_path", required=True, type=click.Path(exists=True))
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--nprobe", type=int, default=None, help="Single value; otherwise sweep.")
def index_recall(index_path: str, queries_path: str, k: int, nprobe: int | None) -> None:
    """Recall@k of probed search against the exact scan, per nprobe."""
    idx = retrieval_index.load_index(index_path)
    corpus = idx.embeddings()
    queries = [e.vector for e in retrieval_index.read_embeddings(queries_path)]
    if nprobe is not None:
        values = [nprobe]
    else:
        values = []
        p = 1
        while p < idx.nlist:
            values.append(p)
            p *= 2
        values.append(idx.nlist)
    for p in values:
        recall = retrieval_index.recall_at_k(idx, corpus, queries, k, p)
        click.echo(f"{p}\t{recall:.4f}")


@main.command()
@click.option("--features", "features_path", required=True, type=click.Path(exists=True))
@click.option("--theta-hist", type=float, default=media_curation.DEFAULT_THETA_HIST, show_default=True)
@click.option("--theta-motion", type=float, default=media_curation.DEFAULT_THETA_MOTION, show_default=True)
@click.option("--min-duration", type=float, default=media_curation.DEFAULT_MIN_DURATION_S, show_default=True)
@click.option("--clip-length", type=float, default=media_curation.DEFAULT_CLIP_LENGTH_S, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def curate(
    features_path: str,
    theta_hist: float,
    theta_motion: float,
    min_duration: float,
    clip_length: float,
    out_path: str,
) -> None:
    """Cut calm fixed-length clips from a frame-feature stream file."""
    stream = media_curation.read_feature_stream(features_path)
    stream_id = pathlib.Path(features_path).stem
    clips = media_curation.curate_stream(
        stream,
        stream_id=stream_id,
        theta_hist=theta_hist,
        theta_motion=theta_motion,
        min_dur_s=min_duration,
        clip_len_s=clip_length,
    )
    with open(out_path, "w", encoding="utf-8") as fh:
        media_curation.write_clips_tsv(fh, clips)
    click.echo(f"wrote {len(clips)} clips -> {out_path}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--index", "index_path", type=click.Path(exists=True), default=None)
def serve(host: str | None, port: int | None, index_path: str | None) -> None:
    """Run the session service (EMOJOURNEY_* env vars fill in the rest)."""
    import dataclasses

    import uvicorn

    config = ServiceConfig.from_env()
    if index_path:
        config = dataclasses.replace(config, index_path=index_path)
    if host:
        config = dataclasses.replace(config, host=host)
    if port:
        config = dataclasses.replace(config, port=port)
    if not config.index_path:
        click.echo("warning: no index configured, sessions will return 503", err=True)
    app = create_app(build_pipeline(config), config.feedback_capacity)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    sys.exit(main())
