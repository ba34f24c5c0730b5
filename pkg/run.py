from src.app import mulnet_entrypoint


def main() -> None:
    mulnet_entrypoint()


if __name__ == "__main__":
    main()
