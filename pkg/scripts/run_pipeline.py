#!/usr/bin/env python3
"""
Script CLI do toolkit de contrails

Uso:
    python run_pipeline.py ingest --scene cena.nc --mask mascara.png --scene-id s01 --split train
    python run_pipeline.py train --config run.toml --loss-id sr --seed 7
    python run_pipeline.py evaluate --checkpoint runs/sr/checkpoints/step_004000.pt
    python run_pipeline.py predict --checkpoint ck.pt --image foto.png --out-dir saida/
    python run_pipeline.py diagnose-hough --target mascara.png --prediction pred.png
    python run_pipeline.py plot-metrics runs/dice/metrics.jsonl runs/sr/metrics.jsonl
    python run_pipeline.py compare-losses --losses dice focal sr

Códigos de saída: 0 sucesso, 2 configuração, 3 dados, 4 divergência, 1 outros.
"""

import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).resolve().parents[1]))

from src.contrails import ContrailPipeline  # noqa: E402
from src.contrails.config import load_settings  # noqa: E402
from src.contrails.exceptions import ContrailsError  # noqa: E402

# Flags que espelham campos de RunConfig: (flag, campo, tipo)
RUN_FLAGS = [
    ("--loss-id", "loss_id", str),
    ("--steps", "steps", int),
    ("--batch-size", "batch_size", int),
    ("--learning-rate", "learning_rate", float),
    ("--eval-every", "eval_every", int),
    ("--checkpoint-every", "checkpoint_every", int),
    ("--eval-threshold", "eval_threshold", float),
    ("--manifest", "manifest_path", str),
    ("--output-dir", "output_dir", str),
    ("--num-workers", "num_workers", int),
    ("--device", "device", str),
]


def build_pipeline(args) -> ContrailPipeline:
    """Carrega configurações (arquivo + flags) e cria o pipeline"""
    run = {field: getattr(args, field) for _, field, _ in RUN_FLAGS if getattr(args, field, None) is not None}
    if args.seed is not None:
        run["seed"] = args.seed
    logging = {"log_level": args.log_level} if args.log_level else {}
    settings = load_settings(args.config, run=run, logging=logging)
    return ContrailPipeline(settings)


def cmd_ingest(args):
    """Ingere uma cena"""
    pipeline = build_pipeline(args)
    stats = pipeline.ingest(args.scene, args.mask, args.scene_id, args.split, args.out_dir)

    print("\n✅ Cena ingerida!")
    print(f"   Cena: {stats['scene_id']} ({stats['split']})")
    print(f"   Formato: {stats['shape']}")
    print(f"   Pixels de contrail: {stats['contrail_pixels']}")


def cmd_train(args):
    """Treina um modelo"""
    pipeline = build_pipeline(args)
    state = pipeline.train(resume_from=args.resume)

    print("\n✅ Treino concluído!")
    print(f"   Passos: {state.step}")
    print(f"   Avaliações: {len(state.history)}")
    if state.history:
        last = state.history[-1]
        print(f"   IoU final: treino {last['train_iou']:.4f}, validação {last['val_iou']:.4f}")


def cmd_evaluate(args):
    """Avalia um checkpoint"""
    pipeline = build_pipeline(args)
    table = pipeline.evaluate(args.checkpoint, out_dir=args.out_dir, oracle=args.oracle)

    print("\n📊 IoU por cena\n")
    print(table.to_string(index=False))


def cmd_predict(args):
    """Segmenta uma imagem"""
    pipeline = build_pipeline(args)
    paths = pipeline.predict(args.checkpoint, args.image, args.out_dir)

    print("\n✅ Predição gravada!")
    print(f"   Máscara: {paths['mask']}")
    print(f"   Sobreposição: {paths['overlay']}")


def cmd_diagnose_hough(args):
    """Gera a figura de diagnóstico de Hough"""
    pipeline = build_pipeline(args)
    result = pipeline.diagnose_hough(args.target, args.out_dir, prediction_mask=args.prediction,
                                     checkpoint=args.checkpoint, image_path=args.image)

    print("\n🔍 Diagnóstico de Hough")
    print(f"   Retas no alvo: {len(result.target_lines)}")
    print(f"   Retas na predição: {len(result.prediction_lines)}")
    print(f"   Figura: {result.figure_path}")


def cmd_plot_metrics(args):
    """Plota curvas de IoU"""
    pipeline = build_pipeline(args)
    path = pipeline.plot_metrics(args.logs, args.out_dir)
    print(f"\n📈 Curvas gravadas em {path}")


def cmd_compare_losses(args):
    """Compara losses com uma execução cada"""
    pipeline = build_pipeline(args)
    summary = pipeline.compare_losses(args.losses, args.out_dir)

    print("\n📊 Comparação de losses\n")
    print(summary.to_string(index=False))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Segmentação de contrails com SR Loss")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Arquivo TOML de configuração")
    common.add_argument("--seed", type=int, help="Sobrescreve run.seed")
    common.add_argument("--log-level", help="Nível de log (DEBUG, INFO, ...)")
    for flag, field, kind in RUN_FLAGS:
        common.add_argument(flag, dest=field, type=kind, help=f"Sobrescreve run.{field}")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="Ingere uma cena rotulada")
    p.add_argument("--scene", required=True, help="NetCDF ou diretório BTDR")
    p.add_argument("--mask", required=True, help="Máscara PNG")
    p.add_argument("--scene-id", required=True)
    p.add_argument("--split", choices=["train", "eval"], default="train")
    p.add_argument("--out-dir", help="Diretório das cenas rotuladas")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", parents=[common], help="Treina um modelo")
    p.add_argument("--resume", help="Checkpoint .pt para retomar")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="IoU por cena")
    p.add_argument("--checkpoint", help="Checkpoint .pt")
    p.add_argument("--out-dir", help="Diretório da tabela")
    p.add_argument("--oracle", action="store_true", help="Usa a máscara verdadeira como predição")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common], help="Segmenta uma imagem")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("diagnose-hough", parents=[common], help="Figura de diagnóstico de Hough")
    p.add_argument("--target", required=True, help="Máscara alvo")
    p.add_argument("--prediction", help="Máscara predita")
    p.add_argument("--checkpoint", help="Checkpoint para gerar a predição")
    p.add_argument("--image", help="Imagem de entrada do checkpoint")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_diagnose_hough)

    p = sub.add_parser("plot-metrics", parents=[common], help="Curvas de IoU")
    p.add_argument("logs", nargs="+", help="Logs metrics.jsonl")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_plot_metrics)

    p = sub.add_parser("compare-losses", parents=[common], help="Uma execução por loss")
    p.add_argument("--losses", nargs="+", default=["dice", "logdice", "focal", "sr"])
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_compare_losses)

    args = parser.parse_args(argv)

    try:
        args.func(args)
    except ContrailsError as e:
        print(f"\n❌ Erro: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"\n❌ Erro inesperado: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
