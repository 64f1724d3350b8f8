"""Command-line front end.

Every subcommand is a thin HTTP client of the detection service: by default
requests run against an in-process instance of the FastAPI app (no socket,
no separate server), and `--server URL` redirects the same calls to a
remote instance.  Exit codes support shell pipelines: 0 clean or success,
2 adversarial verdict, 1 any error.
"""

import asyncio
import base64
import json
import sys
from pathlib import Path

import click
import httpx

IMAGE_SUFFIXES = (".png", ".pgm")
DEFAULT_EPS = 16.0 / 255.0


class ServiceError(click.ClickException):
    exit_code = 1


def _post(server: str | None, path: str, payload: dict) -> dict:
    async def run():
        if server:
            async with httpx.AsyncClient(base_url=server, timeout=300.0) as client:
                return await client.post(path, json=payload)
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://mimetic-detect", timeout=300.0
        ) as client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(run())
    except httpx.HTTPError as exc:
        raise ServiceError(f"service request failed: {exc}") from exc
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ServiceError(f"service error ({response.status_code}): {detail}")
    return response.json()


def _read_image_b64(path: str) -> str:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ServiceError(f"cannot read image {path}: {exc}") from exc
    return base64.b64encode(data).decode("ascii")


def _list_images(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise ServiceError(f"not a directory: {directory}")
    files = sorted(
        p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
    if not files:
        raise ServiceError(f"no .png/.pgm images in {directory}")
    return files


def _load_tau(calibration: str | None, order: int) -> float | None:
    if calibration is None:
        return None
    try:
        with open(calibration) as fh:
            cal = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ServiceError(f"cannot read calibration {calibration}: {exc}") from exc
    if int(cal.get("k", -1)) != order:
        raise ServiceError(
            f"calibration order k={cal.get('k')} does not match --order {order}"
        )
    return float(cal["tau"])


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service (default: in-process).")
@click.pass_context
def cli(ctx, server):
    """Screen images for adversarial-style perturbations."""
    ctx.obj = server


@cli.command()
@click.option("--image", required=True, type=click.Path(), help="PNG or PGM file.")
@click.option("--order", default=2, show_default=True, help="Mimetic order k.")
@click.option("--calibration", default=None, type=click.Path(),
              help="Calibration JSON providing the threshold.")
@click.pass_obj
def detect(server, image, order, calibration):
    """Print the detector report for one image."""
    tau = _load_tau(calibration, order)
    report = _post(server, "/detect", {
        "image_b64": _read_image_b64(image), "order": order, "tau": tau,
    })
    _echo_json(report)
    if report["verdict"] == "adversarial":
        sys.exit(2)


@cli.command()
@click.option("--dir", "directory", required=True, type=click.Path(),
              help="Directory of clean images.")
@click.option("--order", default=2, show_default=True)
@click.option("--alpha", required=True, type=float,
              help="Target false-positive rate in (0, 1).")
@click.option("--out", required=True, type=click.Path(), help="Calibration JSON output.")
@click.pass_obj
def calibrate(server, directory, order, alpha, out):
    """Fit the detection threshold on a held-out clean set."""
    images = [_read_image_b64(str(p)) for p in _list_images(directory)]
    cal = _post(server, "/calibrate", {
        "images_b64": images, "order": order, "alpha": alpha,
    })
    with open(out, "w") as fh:
        json.dump(cal, fh, indent=2)
        fh.write("\n")
    click.echo(f"tau={cal['tau']:.17g} n={cal['n']}")


@cli.command("reproduce-table1")
@click.option("--image", required=True, type=click.Path())
@click.option("--eps", default=DEFAULT_EPS, show_default="16/255", type=float)
@click.option("--seeds", default="1,2,3,4,5", show_default=True,
              help="Comma-separated sign-noise seeds.")
@click.option("--out", default=None, type=click.Path(), help="CSV output path.")
@click.option("--json", "as_json", is_flag=True,
              help="Print full-precision rows as JSON instead of CSV.")
@click.pass_obj
def reproduce_table1(server, image, eps, seeds, out, as_json):
    """Clean vs sign-noise vs smooth-control statistics at k = 2, 4, 6, 8."""
    try:
        seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    except ValueError as exc:
        raise ServiceError(f"bad --seeds value {seeds!r}: {exc}") from exc
    result = _post(server, "/table1", {
        "image_b64": _read_image_b64(image), "eps": eps, "seeds": seed_list,
    })
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(result["csv"])
    if as_json:
        _echo_json(result["rows"])
    elif not out:
        click.echo(result["csv"], nl=False)


@cli.command()
@click.option("--image", required=True, type=click.Path())
@click.option("--order", default=2, show_default=True)
@click.option("--out-prefix", required=True, help="Prefix for the map files.")
@click.option("--eps", default=DEFAULT_EPS, show_default="16/255", type=float)
@click.option("--seed", default=1, show_default=True)
@click.pass_obj
def gradmap(server, image, order, out_prefix, eps, seed):
    """Export clean/adversarial gradient-magnitude maps and their excess."""
    result = _post(server, "/gradmap", {
        "image_b64": _read_image_b64(image), "order": order, "eps": eps, "seed": seed,
    })
    meta = {"order": result["order"], "eps": result["eps"], "seed": result["seed"]}
    for name in ("clean", "adversarial", "excess"):
        entry = result[name]
        path = f"{out_prefix}_{name}.pgm"
        with open(path, "wb") as fh:
            fh.write(base64.b64decode(entry["pgm_b64"]))
        meta[name] = {"file": path, "scale": entry["scale"], "offset": entry["offset"]}
    sidecar = f"{out_prefix}_meta.json"
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    click.echo(sidecar)


@cli.command("eval")
@click.option("--clean", "clean_dir", required=True, type=click.Path(),
              help="Directory of clean images.")
@click.option("--adv", "adv_dir", required=True, type=click.Path(),
              help="Directory of perturbed images.")
@click.option("--order", default=2, show_default=True)
@click.option("--calibration", default=None, type=click.Path(),
              help="Optional calibration JSON for FPR/TPR at its threshold.")
@click.pass_obj
def eval_corpora(server, clean_dir, adv_dir, order, calibration):
    """Score two corpora and report AUC (and rates at a threshold)."""
    tau = _load_tau(calibration, order)

    def pack(directory):
        return [
            {"name": p.name, "image_b64": _read_image_b64(str(p))}
            for p in _list_images(directory)
        ]

    summary = _post(server, "/eval", {
        "clean": pack(clean_dir), "adversarial": pack(adv_dir),
        "order": order, "tau": tau,
    })
    _echo_json(summary)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the detection service with uvicorn."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
