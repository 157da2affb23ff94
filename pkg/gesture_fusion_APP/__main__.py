import os
import sys

import django


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gesture_fusion.settings')
    django.setup()
    from gesture_fusion_APP.cli import cli_dispatch
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
